#include "scaffold/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scaffold/error.hpp"

namespace scaffold::scoring {

namespace {
double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace

ProblemScore composite_score(const ProblemAttempt& attempt, std::size_t reference_steps,
                             const TimeBounds& bounds, const ScoreWeights& weights) {
  if (!(bounds.fast < bounds.slow)) {
    throw Error(Errc::InvalidTimeBounds, "fast bound " + std::to_string(bounds.fast) +
                                             " must be below slow bound " + std::to_string(bounds.slow));
  }
  if (attempt.steps_in_final_solution < 1 || !(attempt.duration_seconds > 0.0)) {
    throw Error(Errc::InvalidArgument, "attempt " + attempt.problem_id + " is not a completed attempt");
  }
  const double wsum = weights.accuracy + weights.optimality + weights.time;
  if (!(weights.accuracy >= 0 && weights.optimality >= 0 && weights.time >= 0 && wsum > 0)) {
    throw Error(Errc::InvalidArgument, "score weights must be non-negative with a positive sum");
  }

  ProblemScore s;
  const auto& apps = attempt.rule_applications;
  if (apps.empty()) {
    s.accuracy = 1.0;
  } else {
    const auto correct = std::count_if(apps.begin(), apps.end(), [](const RuleApplication& a) { return a.correct; });
    s.accuracy = static_cast<double>(correct) / static_cast<double>(apps.size());
  }
  s.optimality = clamp01(static_cast<double>(reference_steps) / attempt.steps_in_final_solution);
  s.time_efficiency = clamp01((bounds.slow - attempt.duration_seconds) / (bounds.slow - bounds.fast));
  s.composite = 100.0 *
                (weights.accuracy * s.accuracy + weights.optimality * s.optimality +
                 weights.time * s.time_efficiency) /
                wsum;
  return s;
}

double nlg(double pre, double post) {
  if (pre >= 100.0) throw Error(Errc::CeilingPretest, "normalized gain undefined at a pretest score of 100");
  if (pre < 0.0 || post < 0.0 || post > 100.0) {
    throw Error(Errc::OutOfRange, "scores must lie in [0, 100]");
  }
  return (post - pre) / std::sqrt(100.0 - pre);
}

double test_score_average(std::span<const double> scores) {
  if (scores.empty()) throw Error(Errc::EmptyList, "no scores to average");
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

}  // namespace scaffold::scoring
