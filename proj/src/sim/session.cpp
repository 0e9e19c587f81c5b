#include "scaffold/sim/session.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "scaffold/error.hpp"

namespace scaffold::sim {
namespace {

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Control: return "Control";
    case Condition::BKT: return "BKT";
    case Condition::DRL: return "DRL";
  }
  return "?";
}

Condition condition_from_string(std::string_view s) {
  for (Condition c : kConditions) {
    if (to_string(c) == s) return c;
  }
  throw Error(Errc::InvalidArgument, "unknown condition " + std::string(s));
}

DecisionRecord assign_problem_type(Condition condition, int level, int slot, std::span<const ProblemType> earlier,
                                   const Policies& policies, const DecisionInputs& in, std::mt19937_64& rng) {
  if (slot < 1 || slot > kAdaptiveSlots) throw Error(Errc::InvalidArgument, "adaptive slot must be 1-3");
  DecisionRecord d;
  d.level = level;
  d.slot = slot;
  switch (condition) {
    case Condition::Control: {
      d.source = DecisionSource::Uniform;
      d.raw = kProblemTypes[std::uniform_int_distribution<std::size_t>(0, 2)(rng)];
      d.rationale = "uniform draw";
      break;
    }
    case Condition::BKT: {
      if (!policies.thresholds || !in.knowledge) throw Error(Errc::InvalidArgument, "BKT condition needs thresholds");
      d.source = DecisionSource::Bkt;
      const auto c = bkt::bkt_condition_select(*in.knowledge, *policies.thresholds, in.position, in.required_rules,
                                            rng, in.inventory);
      d.raw = c.type;
      d.ps_branch = c.ps_branch;
      d.sign_sum = c.sign_sum;
      d.rationale = c.ps_branch ? "coin chose PS" : "coin chose example; sign sum " + fixed(c.sign_sum, 1);
      break;
    }
    case Condition::DRL: {
      if (!policies.model) throw Error(Errc::InvalidArgument, "DRL condition needs a model");
      d.source = DecisionSource::Drl;
      const auto c = drl::select_action(*policies.model, in.state);
      d.raw = c.action;
      d.q = c.q;
      d.rationale = "q = [" + fixed(c.q[0]) + ", " + fixed(c.q[1]) + ", " + fixed(c.q[2]) + "]";
      break;
    }
  }
  d.served = d.raw;
  if (slot == kAdaptiveSlots && earlier.size() >= 2 && earlier[0] != ProblemType::PS &&
      earlier[1] != ProblemType::PS && d.raw != ProblemType::PS) {
    d.served = ProblemType::PS;
    d.overridden = true;
    d.rationale += "; overridden to PS";
  }
  return d;
}

SessionLog run_session(const SimStudentParams& student, const std::string& student_id, int student_index,
                       Condition condition, const Curriculum& curriculum, const VariantCache& variants,
                       const SessionSettings& settings, const Policies& policies, SessionSeeds seeds,
                       bool stop_after_pretest) {
  student.validate();
  SessionLog log;
  log.student_id = student_id;
  log.student_index = student_index;
  log.condition = condition;
  std::mt19937_64 attempt_rng(seeds.attempts), policy_rng(seeds.policy);
  bkt::BktState knowledge(settings.knowledge);
  Mastery latent = student.mastery;
  std::vector<ProblemType> level_types;
  std::vector<drl::HistoryEvent> events;
  bkt::Position last{1, 0};

  for (const auto& slot : curriculum.slots()) {
    if (stop_after_pretest && slot.level > 1) break;
    const auto& problem = curriculum.problem(slot);
    if (slot.slot == 1) level_types.clear();

    AttemptRecord rec;
    rec.slot = slot;
    ProblemType type = ProblemType::PS;
    if (slot.adaptive()) {
      DecisionInputs in;
      in.knowledge = &knowledge;
      in.position = last;
      in.required_rules = problem.required_rules;
      const auto inventory = curriculum.introduced_rules(slot.level);
      in.inventory = inventory;
      std::vector<double> state;
      if (condition == Condition::DRL) {
        if (!policies.model) throw Error(Errc::InvalidArgument, "DRL condition needs a model");
        state = drl::extract_state(events, {slot.level, slot.slot}, drl::default_registry(),
                                   policies.model->normalizer);
        in.state = state;
      }
      rec.decision = assign_problem_type(condition, slot.level, slot.slot, level_types, policies, in, policy_rng);
      type = rec.decision->served;
    }
    level_types.push_back(type);

    auto result = simulate_attempt(student, latent, problem, slot.stage, type, variants, settings.attempt, attempt_rng);
    result.attempt.student_id = student_id;
    for (const auto& app : result.attempt.rule_applications) knowledge.observe(app.rule, app.correct);
    for (std::size_t i = 0; i < latent.size(); ++i) latent[i] = std::max(latent[i], result.mastery_after[i]);

    rec.attempt = std::move(result.attempt);
    rec.latent = latent;
    rec.knowledge = knowledge.scores();
    if (slot.stage != Stage::Intro) {
      rec.score = scoring::composite_score(rec.attempt, problem, settings.time_bounds[static_cast<std::size_t>(slot.level)],
                                           settings.weights);
    }
    last = {slot.level, slot.slot};

    drl::HistoryEvent e;
    e.level = slot.level;
    e.slot = slot.slot;
    e.stage = slot.stage;
    e.type = type;
    e.applications = rec.attempt.rule_applications;
    e.duration_seconds = rec.attempt.duration_seconds;
    e.hints = rec.attempt.hints_requested;
    e.score = rec.score.composite;
    e.mastery = rec.knowledge;
    events.push_back(std::move(e));
    log.attempts.push_back(std::move(rec));
  }
  tally_test_scores(log);
  return log;
}

void tally_test_scores(SessionLog& log) {
  std::vector<double> pretest, posttest;
  log.level_end_scores.fill(0.0);
  for (const auto& rec : log.attempts) {
    if (rec.slot.stage == Stage::Pretest) pretest.push_back(rec.score.composite);
    if (rec.slot.stage == Stage::Posttest) posttest.push_back(rec.score.composite);
    if (rec.slot.stage == Stage::LevelEnd) {
      log.level_end_scores[static_cast<std::size_t>(rec.slot.level - kFirstTrainingLevel)] = rec.score.composite;
    }
  }
  log.pretest_score = mean(pretest);
  log.posttest_score = mean(posttest);
}

std::vector<drl::HistoryEvent> history_events(const SessionLog& log) {
  std::vector<drl::HistoryEvent> out;
  for (const auto& r : log.attempts) {
    drl::HistoryEvent e;
    e.level = r.slot.level;
    e.slot = r.slot.slot;
    e.stage = r.slot.stage;
    e.type = r.attempt.assigned_type;
    e.applications = r.attempt.rule_applications;
    e.duration_seconds = r.attempt.duration_seconds;
    e.hints = r.attempt.hints_requested;
    e.score = r.score.composite;
    e.mastery = r.knowledge;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<drl::Transition> build_transitions(const SessionLog& log, const drl::Normalizer& normalizer,
                                               const drl::FeatureRegistry& registry) {
  if (!log.complete()) throw Error(Errc::IncompleteTrial, "session of " + log.student_id + " is incomplete");
  const auto events = history_events(log);
  const auto decisions = drl::decision_indices(events);
  std::vector<std::vector<double>> states;
  for (std::size_t idx : decisions) {
    states.push_back(drl::extract_state(std::span(events).first(idx), {events[idx].level, events[idx].slot}, registry,
                                        normalizer));
  }
  std::vector<drl::Transition> out;
  for (std::size_t k = 0; k < decisions.size(); ++k) {
    const auto& e = events[decisions[k]];
    double test = log.level_end_scores[static_cast<std::size_t>(e.level - kFirstTrainingLevel)];
    if (e.level == kLastTrainingLevel) test = (test + log.posttest_score) / 2.0;
    drl::Transition t;
    t.state = states[k];
    t.action = e.type;
    t.reward = drl::compute_reward(std::clamp(test, 0.0, 100.0), normalizer.normalized_time(e.level, e.duration_seconds));
    t.terminal = k + 1 == decisions.size();
    if (!t.terminal) t.next_state = states[k + 1];
    t.student_id = log.student_id;
    t.decision_index = static_cast<int>(k);
    out.push_back(std::move(t));
  }
  return out;
}

bkt::HistoricalStudent to_historical(const SessionLog& log) {
  bkt::HistoricalStudent h;
  h.student_id = log.student_id;
  for (const auto& r : log.attempts) h.snapshots.push_back({{r.slot.level, r.slot.slot}, r.knowledge});
  return h;
}

std::vector<Condition> stratified_assign(std::span<const double> scores, std::mt19937_64& rng) {
  if (scores.size() < 3) throw Error(Errc::TooFewStudents, "stratified assignment needs at least 3 students");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<Condition> out(scores.size());
  for (std::size_t start = 0; start < order.size(); start += 3) {
    std::array<Condition, 3> perm = kConditions;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < 3 && start + k < order.size(); ++k) out[order[start + k]] = perm[k];
  }
  return out;
}

}  // namespace scaffold::sim
