#pragma once

#include <span>
#include <string>
#include <vector>

#include "scaffold/logic/proof.hpp"
#include "scaffold/types.hpp"

namespace scaffold::scoring {

struct RuleApplication {
  logic::RuleId rule;
  bool correct;
};

struct ProblemAttempt {
  std::string student_id;
  std::string problem_id;
  ProblemType assigned_type = ProblemType::PS;
  std::vector<RuleApplication> rule_applications;
  int steps_in_final_solution = 1;
  double duration_seconds = 1.0;
  int hints_requested = 0;
};

struct ProblemScore {
  double accuracy = 0.0;
  double optimality = 0.0;
  double time_efficiency = 0.0;
  double composite = 0.0;  // 0-100
};

/// Completion times (seconds) that map to full and to zero time credit.
struct TimeBounds {
  double fast = 0.0;
  double slow = 0.0;
};

struct ScoreWeights {
  double accuracy = 1.0;
  double optimality = 1.0;
  double time = 1.0;
};

/// Accuracy is the share of correct rule applications (1 with none),
/// optimality is reference/used steps, time efficiency is linear between the
/// bounds; all clamped to [0, 1] and combined by normalized weights on a
/// 0-100 scale. Throws Error{InvalidTimeBounds} unless fast < slow.
ProblemScore composite_score(const ProblemAttempt& attempt, std::size_t reference_steps,
                             const TimeBounds& bounds, const ScoreWeights& weights = {});

inline ProblemScore composite_score(const ProblemAttempt& attempt, const logic::Problem& problem,
                                    const TimeBounds& bounds, const ScoreWeights& weights = {}) {
  return composite_score(attempt, problem.reference_steps(), bounds, weights);
}

/// (post - pre) / sqrt(100 - pre). Throws Error{CeilingPretest} at pre = 100.
double nlg(double pretest_score, double posttest_score);

/// Arithmetic mean. Throws Error{EmptyList}.
double test_score_average(std::span<const double> scores);

}  // namespace scaffold::scoring
