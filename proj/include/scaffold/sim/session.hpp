#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "scaffold/bkt.hpp"
#include "scaffold/drl/ddqn.hpp"
#include "scaffold/scoring.hpp"
#include "scaffold/sim/curriculum.hpp"
#include "scaffold/sim/student.hpp"

namespace scaffold::sim {

enum class Condition : std::uint8_t { Control = 0, BKT = 1, DRL = 2 };
inline constexpr std::array<Condition, 3> kConditions = {Condition::Control, Condition::BKT, Condition::DRL};

std::string_view to_string(Condition c);
/// Throws Error{InvalidArgument}.
Condition condition_from_string(std::string_view s);

enum class DecisionSource : std::uint8_t { Uniform, Bkt, Drl };

struct DecisionRecord {
  int level = 2;
  int slot = 1;
  DecisionSource source = DecisionSource::Uniform;
  ProblemType raw = ProblemType::PS;     // what the policy chose
  ProblemType served = ProblemType::PS;  // after the PS override
  bool overridden = false;
  bool ps_branch = false;                // BKT coin
  double sign_sum = 0.0;                 // BKT vote
  std::array<double, 3> q{};             // DRL action values
  std::string rationale;
};

/// Policy artifacts; only the condition's own artifact is consulted.
struct Policies {
  const bkt::ThresholdTable* thresholds = nullptr;
  const drl::TrainedPolicy* model = nullptr;
};

/// Decision context available at an adaptive slot.
struct DecisionInputs {
  const bkt::BktState* knowledge = nullptr;
  bkt::Position position;               // last completed problem
  std::set<RuleId> required_rules;      // of the upcoming problem
  std::span<const RuleId> inventory = logic::kAllRules;  // rules the vote ranges over
  std::span<const double> state;        // DRL features
};

/// Control draws uniformly, BKT uses the coin-then-vote heuristic, DRL acts
/// greedily. Afterwards, slot 3 is forced to PS when slots 1 and 2 were both
/// worked examples. Throws Error{InvalidArgument} when the condition's
/// artifact is missing or the slot is outside 1-3.
DecisionRecord assign_problem_type(Condition condition, int level, int slot, std::span<const ProblemType> earlier,
                                   const Policies& policies, const DecisionInputs& inputs, std::mt19937_64& rng);

struct AttemptRecord {
  CurriculumSlot slot;
  scoring::ProblemAttempt attempt;
  scoring::ProblemScore score;          // zero for intro examples
  std::map<RuleId, double> knowledge;   // tracing estimates after the problem
  Mastery latent{};                     // simulator ground truth after the problem
  std::optional<DecisionRecord> decision;
};

struct SessionLog {
  std::string student_id;
  int student_index = 0;
  Condition condition = Condition::Control;
  std::vector<AttemptRecord> attempts;
  double pretest_score = 0.0;
  double posttest_score = 0.0;
  std::array<double, 5> level_end_scores{};  // levels 2-6

  bool complete() const { return attempts.size() == static_cast<std::size_t>(drl::kSessionLength); }
};

struct SessionSettings {
  AttemptModel attempt;
  bkt::BktParams knowledge;
  scoring::ScoreWeights weights;
  std::array<scoring::TimeBounds, 8> time_bounds{};  // by level
};

struct SessionSeeds {
  std::uint64_t attempts = 0;
  std::uint64_t policy = 0;
};

/// Intro, pretest, levels 2-6 and posttest. Knowledge tracing observes every
/// rule application in every condition. With stop_after_pretest only level 1
/// is run, which is identical to the start of the full session.
SessionLog run_session(const SimStudentParams& student, const std::string& student_id, int student_index,
                       Condition condition, const Curriculum& curriculum, const VariantCache& variants,
                       const SessionSettings& settings, const Policies& policies, SessionSeeds seeds,
                       bool stop_after_pretest = false);

/// Pretest, level-end and posttest scores from the attempt records.
void tally_test_scores(SessionLog& log);

std::vector<drl::HistoryEvent> history_events(const SessionLog& log);

/// One transition per adaptive decision, on the served type. The reward is
/// computed from the decided problem's level-normalized time and the level's
/// end score; level 6 uses the mean of its end score and the posttest.
/// Throws Error{IncompleteTrial} for a partial session.
std::vector<drl::Transition> build_transitions(const SessionLog& log, const drl::Normalizer& normalizer,
                                               const drl::FeatureRegistry& registry = drl::default_registry());

/// Snapshots for threshold estimation.
bkt::HistoricalStudent to_historical(const SessionLog& log);

/// Sort by pretest (ties by index), then randomly permute each consecutive
/// triple over the three conditions; a trailing partial triple gets
/// distinct random conditions. Throws Error{TooFewStudents} below 3.
std::vector<Condition> stratified_assign(std::span<const double> pretest_scores, std::mt19937_64& rng);

}  // namespace scaffold::sim
