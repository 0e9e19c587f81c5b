#include "scaffold/bkt.hpp"

#include <cstdio>
#include <nlohmann/json.hpp>

#include "scaffold/error.hpp"

namespace scaffold::bkt {

void BktParams::validate() const {
  auto in01 = [](double x) { return x > 0.0 && x < 1.0; };
  if (!in01(p_init) || !in01(p_transit) || !in01(p_guess) || !in01(p_slip)) {
    throw Error(Errc::InvalidArgument, "BKT parameters must lie in (0, 1)");
  }
  if (!(p_guess + p_slip < 1.0)) {
    throw Error(Errc::InvalidArgument, "BKT requires p(G) + p(S) < 1");
  }
}

double bkt_update(double p, bool correct, const BktParams& k) {
  const double posterior = correct
                               ? p * (1.0 - k.p_slip) / (p * (1.0 - k.p_slip) + (1.0 - p) * k.p_guess)
                               : p * k.p_slip / (p * k.p_slip + (1.0 - p) * (1.0 - k.p_guess));
  return posterior + (1.0 - posterior) * k.p_transit;
}

BktState::BktState(BktParams params) : params_(params) { params_.validate(); }

double BktState::score(RuleId rule) const {
  auto it = scores_.find(rule);
  return it == scores_.end() ? params_.p_init : it->second;
}

void BktState::observe(RuleId rule, bool correct) {
  scores_[rule] = bkt_update(score(rule), correct, params_);
}

double ThresholdTable::threshold(Position pos, RuleId rule) const {
  if (auto it = entries_.find({pos.level, pos.problem, rule}); it != entries_.end()) return it->second;
  if (auto it = fallback_.find(rule); it != fallback_.end()) return it->second;
  return default_;
}

void ThresholdTable::set(Position pos, RuleId rule, double value) {
  entries_[{pos.level, pos.problem, rule}] = value;
}

void ThresholdTable::set_fallback(RuleId rule, double value) { fallback_[rule] = value; }

ThresholdTable compute_thresholds(std::span<const HistoricalStudent> history, const BktParams& params) {
  if (history.empty()) throw Error(Errc::EmptyHistory, "no historical sessions");
  std::map<std::tuple<int, int, RuleId>, std::pair<double, int>> acc;
  for (const auto& student : history) {
    for (const auto& snap : student.snapshots) {
      for (const auto& [rule, score] : snap.scores) {
        auto& [sum, n] = acc[{snap.position.level, snap.position.problem, rule}];
        sum += score;
        ++n;
      }
    }
  }
  ThresholdTable table(params.p_init);
  std::map<RuleId, std::pair<double, int>> per_rule;
  for (const auto& [key, sn] : acc) {
    const double mean = sn.first / sn.second;
    table.set({std::get<0>(key), std::get<1>(key)}, std::get<2>(key), mean);
    auto& [sum, n] = per_rule[std::get<2>(key)];
    sum += mean;
    ++n;
  }
  for (RuleId r : logic::kAllRules) {
    auto it = per_rule.find(r);
    table.set_fallback(r, it == per_rule.end() ? params.p_init : it->second.first / it->second.second);
  }
  return table;
}

SignDecision score_sign_decision(const BktState& state, const ThresholdTable& thresholds, Position position,
                                 const std::set<RuleId>& required, std::span<const RuleId> inventory) {
  double sum = 0.0;
  for (RuleId r : inventory) {
    const double sign = state.score(r) > thresholds.threshold(position, r) ? 1.0 : -1.0;
    const double weight = required.contains(r) ? 1.0 : 0.5;
    sum += weight * sign;
  }
  return {sum > 0.0 ? ProblemType::Buggy : ProblemType::Guided, sum};
}

ConditionChoice bkt_condition_select(const BktState& state, const ThresholdTable& thresholds,
                                     Position position, const std::set<RuleId>& required,
                                     std::mt19937_64& rng, std::span<const RuleId> inventory) {
  std::bernoulli_distribution coin(0.5);
  if (coin(rng)) return {ProblemType::PS, true, 0.0};
  const auto d = score_sign_decision(state, thresholds, position, required, inventory);
  return {d.type, false, d.sum};
}

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string thresholds_to_json(const ThresholdTable& table, const std::string& meta_json) {
  std::string out = "{\n  \"meta\": " + nlohmann::json::parse(meta_json).dump() + ",\n";
  out += "  \"default\": " + fixed6(table.default_value()) + ",\n  \"thresholds\": {";
  bool first = true;
  auto emit = [&](const std::string& key, double v) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    \"" + key + "\": " + fixed6(v);
  };
  for (const auto& [key, v] : table.entries()) {
    emit(std::to_string(std::get<0>(key)) + "." + std::to_string(std::get<1>(key)) + "." +
             std::string(logic::to_string(std::get<2>(key))),
         v);
  }
  for (const auto& [rule, v] : table.fallbacks()) emit("*.*." + std::string(logic::to_string(rule)), v);
  out += "\n  }\n}\n";
  return out;
}

ThresholdTable thresholds_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::RecordFormat, std::string("thresholds document: ") + e.what());
  }
  if (!doc.contains("thresholds") || !doc["thresholds"].is_object()) {
    throw Error(Errc::RecordFormat, "thresholds document lacks a 'thresholds' object");
  }
  ThresholdTable table(doc.value("default", BktParams{}.p_init));
  for (const auto& [key, value] : doc["thresholds"].items()) {
    const auto d1 = key.find('.');
    const auto d2 = key.find('.', d1 == std::string::npos ? d1 : d1 + 1);
    if (d1 == std::string::npos || d2 == std::string::npos) {
      throw Error(Errc::RecordFormat, "threshold key '" + key + "' is not level.problem.rule");
    }
    const auto rule = logic::rule_from_string(key.substr(d2 + 1));
    if (!rule) throw Error(Errc::RecordFormat, "threshold key '" + key + "' names an unknown rule");
    const double v = value.get<double>();
    if (key.substr(0, d2) == "*.*") {
      table.set_fallback(*rule, v);
      continue;
    }
    try {
      table.set({std::stoi(key.substr(0, d1)), std::stoi(key.substr(d1 + 1, d2 - d1 - 1))}, *rule, v);
    } catch (const std::exception&) {
      throw Error(Errc::RecordFormat, "threshold key '" + key + "' is not level.problem.rule");
    }
  }
  return table;
}

}  // namespace scaffold::bkt
