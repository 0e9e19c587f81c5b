#include <algorithm>
#include <map>
#include <set>

#include "scaffold/sim/experiment.hpp"
#include "test_support.hpp"

namespace scaffold::sim {
namespace {

using testing::bank;

const SimContext& context() {
  static const SimContext ctx = [] {
    SimConfig c;
    c.master_seed = 99;
    c.calibration_students = 60;
    return SimContext(bank(), c);
  }();
  return ctx;
}

drl::Normalizer flat_normalizer() {
  drl::Normalizer n;
  for (int l = 1; l < 8; ++l) n.level_time[static_cast<std::size_t>(l)] = {20.0, 900.0};
  n.feature_lo.assign(drl::kStateSize, 0.0);
  n.feature_hi.assign(drl::kStateSize, 1000.0);
  return n;
}

/// Zero weights with a fixed output bias: a constant preference order.
drl::TrainedPolicy constant_policy(std::array<double, 3> q) {
  drl::TrainedPolicy p;
  p.network = drl::QNetwork({drl::kStateSize, 8, 3});
  for (int i = 0; i < 3; ++i) p.network.layers().back().bias(i) = q[static_cast<std::size_t>(i)];
  p.normalizer = flat_normalizer();
  p.feature_names = drl::default_registry().names();
  return p;
}

std::vector<ProblemType> served_types(const SessionLog& log, int level) {
  std::vector<ProblemType> out;
  for (const auto& a : log.attempts) {
    if (a.slot.level == level && a.slot.adaptive()) out.push_back(a.attempt.assigned_type);
  }
  return out;
}

TEST(Curriculum, Shape) {
  const auto& cur = context().curriculum();
  ASSERT_EQ(cur.size(), 30u);
  std::map<Stage, int> stages;
  for (const auto& s : cur.slots()) ++stages[s.stage];
  EXPECT_EQ(stages[Stage::Intro], 2);
  EXPECT_EQ(stages[Stage::Pretest], 2);
  EXPECT_EQ(stages[Stage::Training], 15);
  EXPECT_EQ(stages[Stage::LevelEnd], 5);
  EXPECT_EQ(stages[Stage::Posttest], 6);
  for (int l = kFirstTrainingLevel; l <= kLastTrainingLevel; ++l) {
    const auto before = cur.introduced_rules(l - 1);
    const auto now = cur.introduced_rules(l);
    EXPECT_GE(now.size(), before.size());
  }
}

TEST(AssignProblemType, OverrideAfterTwoExamples) {
  std::mt19937_64 rng(1);
  const auto pol = constant_policy({0.0, 5.0, 1.0});  // prefers Guided
  const std::vector<double> state(drl::kStateSize, 0.5);
  DecisionInputs in;
  in.state = state;
  const std::array<ProblemType, 2> earlier{ProblemType::Guided, ProblemType::Buggy};
  const auto d = assign_problem_type(Condition::DRL, 3, 3, earlier, Policies{nullptr, &pol}, in, rng);
  EXPECT_EQ(d.raw, ProblemType::Guided);
  EXPECT_EQ(d.served, ProblemType::PS);
  EXPECT_TRUE(d.overridden);

  const std::array<ProblemType, 2> with_ps{ProblemType::PS, ProblemType::Buggy};
  const auto kept = assign_problem_type(Condition::DRL, 3, 3, with_ps, Policies{nullptr, &pol}, in, rng);
  EXPECT_EQ(kept.served, ProblemType::Guided);
  EXPECT_FALSE(kept.overridden);
}

TEST(AssignProblemType, ControlIsUniform) {
  std::mt19937_64 rng(2024);
  DecisionInputs in;
  std::array<int, 3> counts{};
  const int n = 30000;
  for (int i = 0; i < n; ++i) {
    const auto d = assign_problem_type(Condition::Control, 2, 1, {}, Policies{}, in, rng);
    EXPECT_EQ(d.source, DecisionSource::Uniform);
    ++counts[static_cast<std::size_t>(d.raw)];
  }
  for (int c : counts) {
    const double f = static_cast<double>(c) / n;
    EXPECT_GE(f, 0.31);
    EXPECT_LE(f, 0.36);
  }
}

TEST(AssignProblemType, MissingArtifactOrBadSlot) {
  std::mt19937_64 rng(3);
  DecisionInputs in;
  EXPECT_ERRC(assign_problem_type(Condition::DRL, 2, 1, {}, Policies{}, in, rng), Errc::InvalidArgument);
  EXPECT_ERRC(assign_problem_type(Condition::BKT, 2, 1, {}, Policies{}, in, rng), Errc::InvalidArgument);
  EXPECT_ERRC(assign_problem_type(Condition::Control, 2, 4, {}, Policies{}, in, rng), Errc::InvalidArgument);
}

TEST(RunSession, GuidedPreferringPolicyServesGuidedGuidedPs) {
  const auto pol = constant_policy({0.0, 3.0, 1.0});
  const auto log = context().run(Phase::Trial, 0, Condition::DRL, Policies{nullptr, &pol});
  ASSERT_TRUE(log.complete());
  const std::vector<ProblemType> expected{ProblemType::Guided, ProblemType::Guided, ProblemType::PS};
  for (int l = kFirstTrainingLevel; l <= kLastTrainingLevel; ++l) EXPECT_EQ(served_types(log, l), expected);
}

TEST(SimulateAttempt, MasteredRuleNeverFails) {
  auto s = context().student(Phase::History, 0);
  s.slip = 0.0;
  Mastery m;
  m.fill(1.0);
  std::mt19937_64 rng(5);
  for (const auto& slot : context().curriculum().slots()) {
    const auto r = simulate_attempt(s, m, context().curriculum().problem(slot), Stage::Training, ProblemType::PS,
                                    context().variants(), context().settings().attempt, rng);
    for (const auto& a : r.attempt.rule_applications) EXPECT_TRUE(a.correct);
  }
}

TEST(SimulateAttempt, GuessRateAtZeroMastery) {
  auto s = context().student(Phase::History, 1);
  s.guess = 0.3;
  Mastery m{};
  std::mt19937_64 rng(6);
  int total = 0, correct = 0;
  const auto& slots = context().curriculum().slots();
  for (std::size_t i = 0; total < 5000; ++i) {
    const auto& slot = slots[i % slots.size()];
    const auto r = simulate_attempt(s, m, context().curriculum().problem(slot), Stage::Pretest, ProblemType::PS,
                                    context().variants(), context().settings().attempt, rng);
    for (const auto& a : r.attempt.rule_applications) {
      ++total;
      correct += a.correct ? 1 : 0;
    }
  }
  EXPECT_NEAR(static_cast<double>(correct) / total, 0.30, 0.02);
}

TEST(LearningGain, ShapeByType) {
  const LearnGains g{0.1, 0.15, 0.2};
  EXPECT_DOUBLE_EQ(learning_gain(ProblemType::Buggy, 0.0, g), 0.0);
  EXPECT_DOUBLE_EQ(learning_gain(ProblemType::Guided, 0.0, g), 0.15);
  EXPECT_DOUBLE_EQ(learning_gain(ProblemType::PS, 0.0, g), 0.1);
  EXPECT_DOUBLE_EQ(learning_gain(ProblemType::Buggy, 0.5, g), 0.05);
  for (double m = 0.0; m <= 1.0; m += 0.05) {
    for (auto t : kProblemTypes) EXPECT_GE(learning_gain(t, m, g), 0.0);
  }
}

TEST(SimulateAttempt, TestsDoNotTeach) {
  const auto s = context().student(Phase::History, 2);
  Mastery m;
  m.fill(0.4);
  std::mt19937_64 rng(7);
  const auto& slot = context().curriculum().slots().front();
  for (Stage st : {Stage::Pretest, Stage::LevelEnd, Stage::Posttest}) {
    const auto r = simulate_attempt(s, m, context().curriculum().problem(slot), st, ProblemType::PS,
                                    context().variants(), context().settings().attempt, rng);
    EXPECT_EQ(r.mastery_after, m);
  }
}

TEST(SimulateAttempt, MissingVariant) {
  const auto s = context().student(Phase::History, 3);
  Mastery m{};
  std::mt19937_64 rng(8);
  const VariantCache empty;
  const auto& slot = context().curriculum().slots()[5];
  EXPECT_ERRC(simulate_attempt(s, m, context().curriculum().problem(slot), Stage::Training, ProblemType::Guided, empty,
                               context().settings().attempt, rng),
              Errc::MissingVariant);
}

TEST(SampleStudent, ParametersInRange) {
  std::mt19937_64 rng(9);
  PopulationParams pop;
  for (int i = 0; i < 2000; ++i) {
    const auto s = sample_student(pop, rng);
    EXPECT_NO_THROW(s.validate());
  }
}

class CohortTest : public ::testing::Test {
 protected:
  static const std::vector<SessionLog>& cohort() {
    static const auto logs = run_random_cohort(context(), Phase::Corpus, 12);
    return logs;
  }
};

TEST_F(CohortTest, SessionsFollowCurriculum) {
  for (const auto& log : cohort()) {
    ASSERT_EQ(log.attempts.size(), 30u);
    for (std::size_t i = 0; i < 30; ++i) {
      EXPECT_EQ(log.attempts[i].slot.problem_id, context().curriculum().slots()[i].problem_id);
      EXPECT_EQ(log.attempts[i].decision.has_value(), log.attempts[i].slot.adaptive());
      if (log.attempts[i].decision) EXPECT_FALSE(log.attempts[i].decision->rationale.empty());
    }
    for (int l = kFirstTrainingLevel; l <= kLastTrainingLevel; ++l) {
      const auto t = served_types(log, l);
      ASSERT_EQ(t.size(), 3u);
      EXPECT_TRUE(std::count(t.begin(), t.end(), ProblemType::PS) >= 1) << log.student_id << " level " << l;
    }
  }
}

TEST_F(CohortTest, LatentMasteryNeverDrops) {
  for (const auto& log : cohort()) {
    Mastery prev = context().student(Phase::Corpus, log.student_index).mastery;
    for (const auto& a : log.attempts) {
      for (std::size_t r = 0; r < prev.size(); ++r) EXPECT_GE(a.latent[r], prev[r]);
      prev = a.latent;
    }
  }
}

TEST_F(CohortTest, TransitionsChainAndTerminate) {
  std::vector<std::vector<drl::HistoryEvent>> histories;
  for (const auto& log : cohort()) histories.push_back(history_events(log));
  const auto norm = drl::fit_normalizer(histories);
  for (const auto& log : cohort()) {
    const auto t = build_transitions(log, norm);
    ASSERT_EQ(t.size(), 15u);
    for (std::size_t k = 0; k < t.size(); ++k) {
      EXPECT_EQ(t[k].terminal, k + 1 == t.size());
      EXPECT_GE(t[k].reward, 0.0);
      EXPECT_LE(t[k].reward, 100.0);
      for (double x : t[k].state) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
      if (k + 1 < t.size()) EXPECT_EQ(t[k].next_state, t[k + 1].state);
    }
  }
}

TEST_F(CohortTest, TransitionActionIsServedType) {
  std::vector<std::vector<drl::HistoryEvent>> histories;
  for (const auto& log : cohort()) histories.push_back(history_events(log));
  const auto norm = drl::fit_normalizer(histories);
  const auto& log = cohort().front();
  const auto t = build_transitions(log, norm);
  std::size_t k = 0;
  for (const auto& a : log.attempts) {
    if (a.decision) EXPECT_EQ(t[k++].action, a.decision->served);
  }
}

TEST(BuildTransitions, RejectsPartialSession) {
  const auto log = context().run(Phase::Corpus, 0, Condition::Control, Policies{}, true);
  EXPECT_FALSE(log.complete());
  EXPECT_ERRC(build_transitions(log, flat_normalizer()), Errc::IncompleteTrial);
}

TEST(RunSession, PretestPrefixMatchesFullSession) {
  const auto part = context().run(Phase::Trial, 4, Condition::Control, Policies{}, true);
  const auto full = context().run(Phase::Trial, 4, Condition::Control, Policies{});
  ASSERT_EQ(part.attempts.size(), 4u);
  EXPECT_DOUBLE_EQ(part.pretest_score, full.pretest_score);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(part.attempts[i].attempt.rule_applications.size(), full.attempts[i].attempt.rule_applications.size());
    EXPECT_DOUBLE_EQ(part.attempts[i].attempt.duration_seconds, full.attempts[i].attempt.duration_seconds);
  }
}

TEST(RunSession, ConditionIsolationAndDeterminism) {
  const auto pol = constant_policy({1.0, 0.0, 2.0});
  const Policies p{nullptr, &pol};
  const auto a = context().run(Phase::Trial, 7, Condition::Control, p);
  context().run(Phase::Trial, 6, Condition::DRL, p);
  const auto b = context().run(Phase::Trial, 7, Condition::Control, p);
  ASSERT_EQ(a.attempts.size(), b.attempts.size());
  for (std::size_t i = 0; i < a.attempts.size(); ++i) {
    EXPECT_EQ(a.attempts[i].attempt.assigned_type, b.attempts[i].attempt.assigned_type);
    EXPECT_DOUBLE_EQ(a.attempts[i].score.composite, b.attempts[i].score.composite);
  }
  EXPECT_DOUBLE_EQ(a.posttest_score, b.posttest_score);
  // Same student, other condition: identical until the first decision.
  const auto c = context().run(Phase::Trial, 7, Condition::DRL, p);
  EXPECT_DOUBLE_EQ(a.pretest_score, c.pretest_score);
}

TEST(StratifiedAssign, SixStudents) {
  const std::vector<double> scores{40, 10, 60, 30, 20, 50};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto a = stratified_assign(scores, rng);
    ASSERT_EQ(a.size(), 6u);
    for (Condition c : kConditions) {
      int low = 0, high = 0;
      for (std::size_t i = 0; i < 6; ++i) {
        if (a[i] != c) continue;
        (scores[i] <= 30 ? low : high)++;
      }
      EXPECT_EQ(low, 1);
      EXPECT_EQ(high, 1);
    }
  }
}

TEST(StratifiedAssign, TiedScoresAndSizes) {
  std::mt19937_64 rng(11);
  const std::vector<double> tied(6, 50.0);
  const auto a = stratified_assign(tied, rng);
  for (Condition c : kConditions) EXPECT_EQ(std::count(a.begin(), a.end(), c), 2);

  std::vector<double> scores(113);
  std::uniform_real_distribution<double> u(0, 100);
  for (auto& s : scores) s = u(rng);
  const auto b = stratified_assign(scores, rng);
  std::multiset<long> sizes;
  for (Condition c : kConditions) sizes.insert(std::count(b.begin(), b.end(), c));
  EXPECT_EQ(sizes, (std::multiset<long>{37, 38, 38}));

  const std::vector<double> two{1, 2};
  EXPECT_ERRC(stratified_assign(two, rng), Errc::TooFewStudents);
}

TEST(DeriveSeed, DistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint32_t phase = 1; phase <= 4; ++phase) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      for (std::uint32_t purpose = 1; purpose <= 5; ++purpose) {
        seen.insert(derive_seed(7, static_cast<Phase>(phase), i, purpose));
      }
    }
  }
  EXPECT_EQ(seen.size(), 4u * 50u * 5u);
  EXPECT_EQ(derive_seed(7, Phase::Trial, 3, 2), derive_seed(7, Phase::Trial, 3, 2));
  EXPECT_NE(derive_seed(7, Phase::Trial, 3, 2), derive_seed(8, Phase::Trial, 3, 2));
}

TEST(ParallelFor, RethrowsAndCoversRange) {
  std::vector<int> hits(100, 0);
  parallel_for(100, 3, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  EXPECT_ERRC(parallel_for(10, 2, [](int i) {
                if (i == 5) throw Error(Errc::OutOfRange, "boom");
              }),
              Errc::OutOfRange);
}

TEST(Trial, SmallTrialIsBalancedAndDeterministic) {
  const auto pol = constant_policy({0.0, 1.0, 0.5});
  const std::vector<bkt::HistoricalStudent> history{
      to_historical(context().run(Phase::History, 0, Condition::Control, Policies{})),
      to_historical(context().run(Phase::History, 1, Condition::Control, Policies{}))};
  const auto thr = bkt::compute_thresholds(history);
  const Policies p{&thr, &pol};
  const auto r1 = run_trial(context(), 9, p);
  const auto r2 = run_trial(context(), 9, p);
  ASSERT_EQ(r1.logs.size(), 9u);
  for (Condition c : kConditions) EXPECT_EQ(std::count(r1.assignment.begin(), r1.assignment.end(), c), 3);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(r1.logs[i].condition, r1.assignment[i]);
    EXPECT_DOUBLE_EQ(r1.logs[i].posttest_score, r2.logs[i].posttest_score);
    EXPECT_DOUBLE_EQ(r1.logs[i].pretest_score, r1.pretest_scores[i]);
  }
}

TEST(Features, SimulatedHistoriesStayInRange) {
  const auto logs = run_random_cohort(context(), Phase::History, 8);
  std::vector<std::vector<drl::HistoryEvent>> histories;
  for (const auto& log : logs) histories.push_back(history_events(log));
  const auto norm = drl::fit_normalizer(histories);
  for (const auto& h : histories) {
    for (std::size_t k : drl::decision_indices(h)) {
      const auto s = drl::extract_state(std::span(h).first(k), drl::DecisionPoint{h[k].level, h[k].slot},
                                         drl::default_registry(), norm);
      for (double x : s) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
    }
  }
}

}  // namespace
}  // namespace scaffold::sim
