#include "scaffold/drl/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "scaffold/error.hpp"

namespace scaffold::drl {
namespace {

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();
constexpr int kFirstLevel = 1;
constexpr int kLastTrackedLevel = 6;

double ratio(double num, double den) { return den > 0.0 ? num / den : kNone; }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return kNone;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

bool scored(const HistoryEvent& e) { return e.stage != Stage::Intro; }

struct Tally {
  double correct = 0.0;
  double total = 0.0;
  void add(const HistoryEvent& e) {
    for (const auto& a : e.applications) {
      total += 1.0;
      correct += a.correct ? 1.0 : 0.0;
    }
  }
  double accuracy() const { return ratio(correct, total); }
  double errors() const { return ratio(total - correct, total); }
};

class Builder {
 public:
  Builder(std::vector<FeatureSpec>* specs, std::vector<double>* values) : specs_(specs), values_(values) {}
  void add(std::string name, FeatureKind kind, FeatureGroup group, double value) {
    if (specs_) specs_->push_back({std::move(name), kind, group});
    if (values_) values_->push_back(value);
  }

 private:
  std::vector<FeatureSpec>* specs_;
  std::vector<double>* values_;
};

void build(std::span<const HistoryEvent> h, DecisionPoint d, const Normalizer& norm, Builder& out) {
  using K = FeatureKind;
  using G = FeatureGroup;

  // Latest estimate per rule.
  std::map<RuleId, double> latest;
  for (const auto& e : h) {
    for (const auto& [r, p] : e.mastery) latest[r] = p;
  }

  // Mastery: rules, levels, types, overall.
  std::map<RuleId, Tally> rule_tally;
  for (const auto& e : h) {
    for (const auto& a : e.applications) {
      auto& t = rule_tally[a.rule];
      t.total += 1.0;
      t.correct += a.correct ? 1.0 : 0.0;
    }
  }
  for (RuleId r : logic::kAllRules) {
    const std::string base = "mastery.rule." + std::string(logic::to_string(r));
    auto it = latest.find(r);
    out.add(base + ".estimate", K::Ratio, G::Mastery, it == latest.end() ? kNone : it->second);
    auto tt = rule_tally.find(r);
    out.add(base + ".accuracy", K::Ratio, G::Mastery, tt == rule_tally.end() ? kNone : tt->second.accuracy());
  }
  for (int level = kFirstLevel; level <= kLastTrackedLevel; ++level) {
    Tally t;
    std::set<RuleId> exercised;
    const HistoryEvent* last = nullptr;
    for (const auto& e : h) {
      if (e.level != level || !scored(e)) continue;
      t.add(e);
      for (const auto& a : e.applications) exercised.insert(a.rule);
      last = &e;
    }
    std::vector<double> est;
    if (last) {
      for (RuleId r : exercised) {
        if (auto it = last->mastery.find(r); it != last->mastery.end()) est.push_back(it->second);
      }
    }
    const std::string base = "mastery.level" + std::to_string(level);
    out.add(base + ".estimate", K::Ratio, G::Mastery, mean_of(est));
    out.add(base + ".accuracy", K::Ratio, G::Mastery, t.accuracy());
  }
  for (ProblemType type : kProblemTypes) {
    Tally t;
    std::vector<double> scores;
    for (const auto& e : h) {
      if (!scored(e) || e.type != type) continue;
      t.add(e);
      scores.push_back(e.score / 100.0);
    }
    const std::string base = "mastery.type." + std::string(to_string(type));
    out.add(base + ".estimate", K::Ratio, G::Mastery, mean_of(scores));
    out.add(base + ".accuracy", K::Ratio, G::Mastery, t.accuracy());
  }
  {
    Tally t;
    for (const auto& e : h) t.add(e);
    std::vector<double> est;
    for (const auto& [r, p] : latest) est.push_back(p);
    out.add("mastery.overall.estimate", K::Ratio, G::Mastery, mean_of(est));
    out.add("mastery.overall.accuracy", K::Ratio, G::Mastery, t.accuracy());
  }

  // Temporal.
  for (int level = kFirstLevel; level <= kLastTrackedLevel; ++level) {
    std::vector<double> times;
    for (const auto& e : h) {
      if (e.level == level && scored(e)) times.push_back(norm.normalized_time(level, e.duration_seconds));
    }
    out.add("time.level" + std::to_string(level) + ".normalized", K::Ratio, G::Temporal, mean_of(times));
  }
  double session = 0.0, since_hint = 0.0, level_time = 0.0;
  for (const auto& e : h) {
    session += e.duration_seconds;
    since_hint = e.hints > 0 ? 0.0 : since_hint + e.duration_seconds;
    if (e.level == d.level) level_time += e.duration_seconds;
  }
  out.add("time.session", K::Time, G::Temporal, h.empty() ? kNone : session);
  out.add("time.since_last_hint", K::Time, G::Temporal, h.empty() ? kNone : since_hint);
  out.add("time.last_problem", K::Time, G::Temporal, h.empty() ? kNone : h.back().duration_seconds);
  for (ProblemType type : kProblemTypes) {
    std::vector<double> times;
    for (const auto& e : h) {
      if (scored(e) && e.type == type) times.push_back(e.duration_seconds);
    }
    out.add("time.type." + std::string(to_string(type)) + ".mean", K::Time, G::Temporal, mean_of(times));
  }
  {
    bool any = false;
    for (const auto& e : h) any = any || e.level == d.level;
    out.add("time.current_level", K::Time, G::Temporal, any ? level_time : kNone);
  }
  {
    std::vector<double> times;
    for (const auto& e : h) {
      if (e.stage == Stage::LevelEnd) times.push_back(e.duration_seconds);
    }
    out.add("time.level_end.mean", K::Time, G::Temporal, mean_of(times));
  }

  // Help seeking.
  double hints = 0.0, problems = 0.0, hinted = 0.0;
  for (const auto& e : h) {
    if (!scored(e)) continue;
    hints += e.hints;
    problems += 1.0;
    hinted += e.hints > 0 ? 1.0 : 0.0;
  }
  out.add("help.hints.total", K::Count, G::HelpSeeking, h.empty() ? kNone : hints);
  out.add("help.hints.per_problem", K::Count, G::HelpSeeking, ratio(hints, problems));
  for (ProblemType type : kProblemTypes) {
    double th = 0.0, tp = 0.0;
    for (const auto& e : h) {
      if (!scored(e) || e.type != type) continue;
      th += e.hints;
      tp += 1.0;
    }
    out.add("help.hints.type." + std::string(to_string(type)), K::Count, G::HelpSeeking, ratio(th, tp));
  }
  out.add("help.hint_utilization", K::Ratio, G::HelpSeeking, ratio(hinted, problems));
  {
    Tally t;
    for (const auto& e : h) t.add(e);
    out.add("help.errors.overall", K::Ratio, G::HelpSeeking, t.errors());
  }
  for (ProblemType type : kProblemTypes) {
    Tally t;
    for (const auto& e : h) {
      if (scored(e) && e.type == type) t.add(e);
    }
    out.add("help.errors.type." + std::string(to_string(type)), K::Ratio, G::HelpSeeking, t.errors());
  }
  {
    Tally t;
    int seen = 0;
    for (auto it = h.rbegin(); it != h.rend() && seen < 3; ++it) {
      if (it->applications.empty()) continue;
      t.add(*it);
      ++seen;
    }
    out.add("help.errors.recent", K::Ratio, G::HelpSeeking, t.errors());
  }
  out.add("help.hints.last_problem", K::Count, G::HelpSeeking,
          h.empty() ? kNone : static_cast<double>(h.back().hints));

  // History.
  for (ProblemType type : kProblemTypes) {
    double n = 0.0;
    for (const auto& e : h) n += (e.stage == Stage::Training && e.type == type) ? 1.0 : 0.0;
    out.add("history.count." + std::string(to_string(type)), K::Count, G::History, n);
  }
  for (ProblemType type : kProblemTypes) {
    double n = 0.0;
    for (const auto& e : h) n += (e.stage == Stage::Training && e.level == d.level && e.type == type) ? 1.0 : 0.0;
    out.add("history.level_count." + std::string(to_string(type)), K::Count, G::History, n);
  }
  out.add("history.level_progress", K::Ratio, G::History, std::clamp((d.level - 2) / 4.0, 0.0, 1.0));
  out.add("history.slot_position", K::Ratio, G::History, std::clamp((d.slot - 1) / 2.0, 0.0, 1.0));
  out.add("history.completed_fraction", K::Ratio, G::History,
          std::min(1.0, static_cast<double>(h.size()) / kSessionLength));
  std::vector<double> pretest, level_end;
  for (const auto& e : h) {
    if (e.stage == Stage::Pretest) pretest.push_back(e.score / 100.0);
    if (e.stage == Stage::LevelEnd) level_end.push_back(e.score / 100.0);
  }
  out.add("history.pretest_score", K::Ratio, G::History, mean_of(pretest));
  out.add("history.level_end.last", K::Ratio, G::History, level_end.empty() ? kNone : level_end.back());
  out.add("history.level_end.mean", K::Ratio, G::History, mean_of(level_end));
}

}  // namespace

FeatureRegistry::FeatureRegistry(std::vector<FeatureSpec> specs) : specs_(std::move(specs)) {
  std::set<std::string> seen;
  for (const auto& s : specs_) {
    if (!seen.insert(s.name).second) throw Error(Errc::RegistryMismatch, "duplicate feature name " + s.name);
  }
}

std::vector<std::string> FeatureRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& s : specs_) out.push_back(s.name);
  return out;
}

std::size_t FeatureRegistry::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (specs_[i].name == name) return i;
  }
  throw Error(Errc::RegistryMismatch, "unknown feature " + name);
}

const FeatureRegistry& default_registry() {
  static const FeatureRegistry registry = [] {
    std::vector<FeatureSpec> specs;
    Builder b(&specs, nullptr);
    build({}, {}, Normalizer{}, b);
    return FeatureRegistry(std::move(specs));
  }();
  return registry;
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Ratio: return "ratio";
    case FeatureKind::Count: return "count";
    case FeatureKind::Time: return "time";
  }
  return "?";
}

std::string_view to_string(FeatureGroup group) {
  switch (group) {
    case FeatureGroup::Mastery: return "mastery";
    case FeatureGroup::Temporal: return "temporal";
    case FeatureGroup::HelpSeeking: return "help-seeking";
    case FeatureGroup::History: return "history";
  }
  return "?";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Intro: return "intro";
    case Stage::Pretest: return "pretest";
    case Stage::Training: return "training";
    case Stage::LevelEnd: return "level-end";
    case Stage::Posttest: return "posttest";
  }
  return "?";
}

Stage stage_from_string(std::string_view s) {
  for (Stage st : {Stage::Intro, Stage::Pretest, Stage::Training, Stage::LevelEnd, Stage::Posttest}) {
    if (to_string(st) == s) return st;
  }
  throw Error(Errc::RecordFormat, "unknown stage " + std::string(s));
}

double Normalizer::normalized_time(int level, double seconds) const {
  if (level < 0 || level >= static_cast<int>(level_time.size())) return 0.0;
  const auto& r = level_time[static_cast<std::size_t>(level)];
  if (!(r.hi > r.lo)) return 0.0;
  return std::clamp((seconds - r.lo) / (r.hi - r.lo), 0.0, 1.0);
}

std::vector<double> raw_features(std::span<const HistoryEvent> history, DecisionPoint decision,
                                 const Normalizer& normalizer) {
  std::vector<double> values;
  values.reserve(kStateSize);
  Builder b(nullptr, &values);
  build(history, decision, normalizer, b);
  return values;
}

std::vector<double> extract_state(std::span<const HistoryEvent> history, DecisionPoint decision,
                                  const FeatureRegistry& registry, const Normalizer& normalizer) {
  if (registry.size() != kStateSize) {
    throw Error(Errc::RegistryMismatch, "registry has " + std::to_string(registry.size()) + " features, expected 74");
  }
  if (normalizer.feature_lo.size() != kStateSize || normalizer.feature_hi.size() != kStateSize) {
    throw Error(Errc::RegistryMismatch, "normalizer is not 74 features wide");
  }
  auto x = raw_features(history, decision, normalizer);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto kind = registry[i].kind;
    if (std::isnan(x[i])) {
      x[i] = kind == FeatureKind::Ratio ? 0.5 : 0.0;
    } else if (kind == FeatureKind::Ratio) {
      x[i] = std::clamp(x[i], 0.0, 1.0);
    } else {
      const double lo = normalizer.feature_lo[i], hi = normalizer.feature_hi[i];
      x[i] = hi > lo ? std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    }
  }
  return x;
}

std::vector<std::size_t> decision_indices(std::span<const HistoryEvent> session) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < session.size(); ++i) {
    if (session[i].stage == Stage::Training) out.push_back(i);
  }
  return out;
}

Normalizer fit_normalizer(std::span<const std::vector<HistoryEvent>> sessions, const FeatureRegistry& registry) {
  if (registry.size() != kStateSize) throw Error(Errc::RegistryMismatch, "registry is not 74 features wide");
  Normalizer n;
  std::array<bool, 8> seen{};
  for (const auto& s : sessions) {
    for (const auto& e : s) {
      if (!scored(e) || e.level < 0 || e.level >= 8) continue;
      auto& r = n.level_time[static_cast<std::size_t>(e.level)];
      auto& f = seen[static_cast<std::size_t>(e.level)];
      r.lo = f ? std::min(r.lo, e.duration_seconds) : e.duration_seconds;
      r.hi = f ? std::max(r.hi, e.duration_seconds) : e.duration_seconds;
      f = true;
    }
  }
  n.feature_lo.assign(kStateSize, std::numeric_limits<double>::infinity());
  n.feature_hi.assign(kStateSize, -std::numeric_limits<double>::infinity());
  for (const auto& s : sessions) {
    for (std::size_t idx : decision_indices(s)) {
      const auto& e = s[idx];
      const auto x = raw_features(std::span(s).first(idx), {e.level, e.slot}, n);
      for (std::size_t i = 0; i < kStateSize; ++i) {
        if (std::isnan(x[i])) continue;
        n.feature_lo[i] = std::min(n.feature_lo[i], x[i]);
        n.feature_hi[i] = std::max(n.feature_hi[i], x[i]);
      }
    }
  }
  for (std::size_t i = 0; i < kStateSize; ++i) {
    if (n.feature_lo[i] > n.feature_hi[i]) {
      n.feature_lo[i] = 0.0;
      n.feature_hi[i] = 1.0;
    }
  }
  return n;
}

}  // namespace scaffold::drl
