#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "scaffold/logic/bank.hpp"
#include "scaffold/logic/variants.hpp"
#include "scaffold/scoring.hpp"
#include "scaffold/sim/curriculum.hpp"

namespace scaffold::sim {

using logic::RuleId;
using Mastery = std::array<double, logic::kAllRules.size()>;

struct LearnGains {
  double ps = 0.0;
  double guided = 0.0;
  double buggy = 0.0;
};

struct SimStudentParams {
  Mastery mastery{};  // latent, per rule
  LearnGains gains;
  double slip = 0.1;
  double guess = 0.2;
  double speed = 1.0;  // duration multiplier
  double hint_propensity = 0.3;
  std::uint64_t seed = 0;

  /// Throws Error{InvalidArgument} unless slip, guess in [0, 0.5), gains in
  /// [0, 0.3] and mastery in [0, 1].
  void validate() const;
};

/// Distributions the population is drawn from. Each student's overall
/// ability comes from Beta(ability_alpha, ability_beta); rule masteries are
/// Beta draws concentrated around it.
struct PopulationParams {
  double ability_alpha = 1.2;
  double ability_beta = 1.6;
  double rule_concentration = 8.0;
  LearnGains gain_mean{0.09, 0.11, 0.18};
  double gain_jitter = 0.2;  // log-normal sigma
  double slip_lo = 0.05, slip_hi = 0.15;
  double guess_lo = 0.10, guess_hi = 0.30;
  double speed_sigma = 0.25;
  double hint_lo = 0.1, hint_hi = 0.6;

  void validate() const;
};

/// Attempt-level constants of the simulated tutor.
struct AttemptModel {
  double seconds_per_action = 25.0;
  double hint_seconds = 15.0;
  double duration_sigma = 0.25;
  double guided_time_factor = 0.55;
  double buggy_time_factor = 0.75;
  double intro_time_factor = 0.3;
  double intro_gain = 0.02;
  double detour_probability = 0.5;
  int max_tries = 3;
};

SimStudentParams sample_student(const PopulationParams& population, std::mt19937_64& rng);

/// P(correct) = m (1 - slip) + (1 - m) guess.
double correct_probability(double mastery, double slip, double guess);

/// Learning increment for one exercised rule.
double learning_gain(ProblemType type, double mastery, const LearnGains& gains);

/// Guided and Buggy variants for every adaptive problem.
struct VariantCache {
  std::map<std::string, logic::GuidedVariant> guided;
  std::map<std::string, logic::BuggyVariant> buggy;
};

VariantCache build_variants(const Curriculum& curriculum, double guided_fraction, int buggy_count,
                            std::uint64_t seed);

struct AttemptResult {
  scoring::ProblemAttempt attempt;
  Mastery mastery_after{};
};

/// One simulated attempt. PS exercises every derived step, Guided every
/// missing justification, Buggy every inserted bug (attributed to the node's
/// rule); intro examples are read passively. Latent mastery of each rule in
/// the reference solution then rises by the type's gain. Tests (pretest, level-end
/// and posttest) produce no learning. Throws Error{MissingVariant} when the
/// cache lacks the needed variant.
AttemptResult simulate_attempt(const SimStudentParams& student, const Mastery& mastery,
                               const logic::Problem& problem, Stage stage, ProblemType type,
                               const VariantCache& variants, const AttemptModel& model, std::mt19937_64& rng);

}  // namespace scaffold::sim
