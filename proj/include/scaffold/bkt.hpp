#pragma once

#include <compare>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "scaffold/logic/rules.hpp"
#include "scaffold/types.hpp"

namespace scaffold::bkt {

using logic::RuleId;

struct BktParams {
  double p_init = 0.01;     // p(L0)
  double p_transit = 0.01;  // p(T)
  double p_guess = 0.3;     // p(G)
  double p_slip = 0.1;      // p(S)

  /// Throws Error{InvalidArgument} unless every value is in (0,1) and
  /// p_guess + p_slip < 1.
  void validate() const;
};

/// Posterior given the observation, followed by the learning transition.
/// Total on p in (0,1); the result stays in (0,1).
double bkt_update(double p, bool observed_correct, const BktParams& params);

/// Per-rule mastery estimates; unobserved rules read as p(L0).
class BktState {
 public:
  explicit BktState(BktParams params = {});

  double score(RuleId rule) const;
  bool observed(RuleId rule) const { return scores_.contains(rule); }
  void observe(RuleId rule, bool correct);
  void set(RuleId rule, double p) { scores_[rule] = p; }

  const std::map<RuleId, double>& scores() const { return scores_; }
  const BktParams& params() const { return params_; }

 private:
  BktParams params_;
  std::map<RuleId, double> scores_;
};

/// Problem position in the curriculum, e.g. {2, 1} for problem 2.1.
struct Position {
  int level = 0;
  int problem = 0;
  auto operator<=>(const Position&) const = default;
};

class ThresholdTable {
 public:
  explicit ThresholdTable(double default_value = BktParams{}.p_init) : default_(default_value) {}

  /// Position entry, else the rule's fallback, else p(L0).
  double threshold(Position pos, RuleId rule) const;

  void set(Position pos, RuleId rule, double value);
  void set_fallback(RuleId rule, double value);

  const std::map<std::tuple<int, int, RuleId>, double>& entries() const { return entries_; }
  const std::map<RuleId, double>& fallbacks() const { return fallback_; }
  double default_value() const { return default_; }

  bool operator==(const ThresholdTable&) const = default;

 private:
  std::map<std::tuple<int, int, RuleId>, double> entries_;
  std::map<RuleId, double> fallback_;
  double default_;
};

/// Rule scores right after a completed problem.
struct StateSnapshot {
  Position position;
  std::map<RuleId, double> scores;
};

struct HistoricalStudent {
  std::string student_id;
  std::vector<StateSnapshot> snapshots;
};

/// threshold(level, problem, rule) is the mean historical score of the rule
/// right after that problem, over students whose snapshot has the rule; the
/// per-rule fallback is the mean of the rule's position thresholds, and p(L0)
/// for rules never observed. Throws Error{EmptyHistory}.
ThresholdTable compute_thresholds(std::span<const HistoricalStudent> history,
                                  const BktParams& params = {});

struct SignDecision {
  ProblemType type;  // Buggy or Guided
  double sum;        // weighted scoreSign sum
};

/// Weighted vote over the rule inventory: +1 above threshold (strictly),
/// -1 otherwise; weight 1.0 for required rules, 0.5 for the rest. A positive
/// sum selects Buggy, zero or negative selects Guided.
SignDecision score_sign_decision(const BktState& state, const ThresholdTable& thresholds,
                                 Position position, const std::set<RuleId>& required_rules,
                                 std::span<const RuleId> inventory = logic::kAllRules);

struct ConditionChoice {
  ProblemType type;
  bool ps_branch;   // the coin chose problem solving
  double sign_sum;  // 0 when ps_branch
};

/// Fair coin between PS and a worked example; the example type comes from
/// score_sign_decision.
ConditionChoice bkt_condition_select(const BktState& state, const ThresholdTable& thresholds,
                                     Position position, const std::set<RuleId>& required_rules,
                                     std::mt19937_64& rng,
                                     std::span<const RuleId> inventory = logic::kAllRules);

/// Flat document keyed "level.problem.rule" (fallbacks as "*.*.rule"),
/// six decimals, with an optional metadata object.
std::string thresholds_to_json(const ThresholdTable& table, const std::string& meta_json = "{}");
ThresholdTable thresholds_from_json(const std::string& text);

}  // namespace scaffold::bkt
