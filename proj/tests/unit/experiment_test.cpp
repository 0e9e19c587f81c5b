#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "scaffold/experiment/pipeline.hpp"
#include "scaffold/logic/bank.hpp"
#include "test_support.hpp"

namespace scaffold::experiment {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("scaffold_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_config(const fs::path& out) {
  auto c = parse_config(R"(
master_seed = 5
[population]
history = 30
drl_corpus = 12
trial = 12
[scoring]
calibration_students = 40
[drl]
epochs = 3
[report]
bootstrap_iterations = 200
)",
                        fs::current_path());
  c.output_dir = out;
  return c;
}

const sim::SimContext& context() {
  static const auto bank = logic::load_bank(SCAFFOLD_BANK_DIR);
  static const sim::SimContext ctx = [] {
    sim::SimConfig c;
    c.master_seed = 3;
    c.calibration_students = 40;
    return sim::SimContext(bank, c);
  }();
  return ctx;
}

TEST(Config, MinimalConfigGetsDefaults) {
  const auto c = parse_config("master_seed = 11\n", fs::current_path());
  EXPECT_EQ(c.master_seed, 11u);
  EXPECT_EQ(c.sim.master_seed, 11u);
  EXPECT_EQ(c.population.history, 721);
  EXPECT_EQ(c.population.drl_corpus, 103);
  EXPECT_EQ(c.population.trial, 113);
  EXPECT_EQ(c.drl.hidden, (std::vector<int>{64, 128, 64}));
  EXPECT_EQ(c.drl.batch_size, 100);
  EXPECT_EQ(c.drl.target_sync_interval, 50);
  EXPECT_DOUBLE_EQ(c.sim.knowledge.p_init, 0.01);
  EXPECT_EQ(c.bank, fs::weakly_canonical(default_bank_dir()));
  EXPECT_EQ(c.bootstrap_iterations, 2000);
}

TEST(Config, ErrorsNameTheField) {
  try {
    parse_config("[population]\ntrial = 0\n", fs::current_path());
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ConfigError);
    EXPECT_NE(std::string(e.what()).find("population.trial"), std::string::npos) << e.what();
  }
  EXPECT_ERRC(parse_config("[student]\nslip_max = 0.7\n", "."), Errc::ConfigError);
  EXPECT_ERRC(parse_config("bank = \"/nonexistent/bank\"\n", "."), Errc::ConfigError);
  EXPECT_ERRC(parse_config("master_seed = \"x\"\n", "."), Errc::ConfigError);
  EXPECT_ERRC(parse_config("master_seed = [\n", "."), Errc::ConfigError);
  EXPECT_ERRC(parse_config("[knowledge]\np_guess = 0.6\np_slip = 0.5\n", "."), Errc::ConfigError);
}

TEST(Config, UnknownFieldsRejected) {
  try {
    parse_config("[drl]\nlearning_rat = 0.1\n", fs::current_path());
    FAIL() << "expected UnknownField";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownField);
    EXPECT_NE(std::string(e.what()).find("drl.learning_rat"), std::string::npos);
  }
  EXPECT_ERRC(parse_config("seeed = 1\n", "."), Errc::UnknownField);
  EXPECT_ERRC(parse_config("[extra]\nx = 1\n", "."), Errc::UnknownField);
}

TEST(Config, ResolvedEchoRoundTrips) {
  auto c = parse_config(R"(
master_seed = 77
[student]
gain_guided = 0.123456789
[drl]
learning_rate = 3e-4
hidden = [8, 16]
)",
                        fs::current_path());
  const auto echo = resolved_toml(c);
  const auto back = parse_config(echo, "/");
  EXPECT_TRUE(back == c);
  EXPECT_EQ(resolved_toml(back), echo);
  EXPECT_DOUBLE_EQ(back.sim.population.gain_mean.guided, 0.123456789);
}

TEST(Config, HashIgnoresOutputAndWorkers) {
  auto a = parse_config("master_seed = 1\n", fs::current_path());
  auto b = a;
  b.output_dir = "/elsewhere";
  b.sim.workers = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.master_seed = 2;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
}

TEST(Config, OutputRootFromEnvironment) {
  auto c = parse_config("master_seed = 1\n", fs::current_path());
  c.output_dir = "/from/config";
  ::unsetenv(kOutputRootEnv);
  EXPECT_EQ(run_directory(c), fs::path("/from/config") / config_hash(c));
  ::setenv(kOutputRootEnv, "/from/env", 1);
  EXPECT_EQ(run_directory(c), fs::path("/from/env") / config_hash(c));
  ::unsetenv(kOutputRootEnv);
}

TEST(Records, SessionLogsRoundTrip) {
  const auto logs = sim::run_random_cohort(context(), sim::Phase::History, 3);
  RecordHeader h{"", kRecordVersion, "abc", 3, "history"};
  std::stringstream ss;
  write_session_logs(ss, h, logs);
  const auto text = ss.str();
  std::stringstream in(text);
  const auto back = read_session_logs(in);
  EXPECT_EQ(back.header.schema, kSessionSchema);
  EXPECT_EQ(back.header.config_hash, "abc");
  ASSERT_EQ(back.logs.size(), logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    EXPECT_EQ(back.logs[i].student_id, logs[i].student_id);
    EXPECT_EQ(back.logs[i].attempts.size(), logs[i].attempts.size());
    EXPECT_DOUBLE_EQ(back.logs[i].posttest_score, logs[i].posttest_score);
    EXPECT_EQ(back.logs[i].level_end_scores, logs[i].level_end_scores);
    for (std::size_t k = 0; k < logs[i].attempts.size(); ++k) {
      EXPECT_EQ(back.logs[i].attempts[k].knowledge, logs[i].attempts[k].knowledge);
      EXPECT_EQ(back.logs[i].attempts[k].latent, logs[i].attempts[k].latent);
      EXPECT_EQ(back.logs[i].attempts[k].decision.has_value(), logs[i].attempts[k].decision.has_value());
    }
  }
  std::stringstream again;
  write_session_logs(again, back.header, back.logs);
  EXPECT_EQ(again.str(), text);
}

TEST(Records, TransitionsRoundTrip) {
  const auto logs = sim::run_random_cohort(context(), sim::Phase::Corpus, 2);
  std::vector<std::vector<drl::HistoryEvent>> hist;
  for (const auto& l : logs) hist.push_back(sim::history_events(l));
  const auto norm = drl::fit_normalizer(hist);
  std::vector<drl::Transition> ts;
  for (const auto& l : logs) {
    auto t = sim::build_transitions(l, norm);
    ts.insert(ts.end(), t.begin(), t.end());
  }
  std::stringstream ss;
  write_transitions(ss, RecordHeader{"", 1, "h", 3, "drl-corpus"}, norm, ts);
  const auto back = read_transitions(ss);
  ASSERT_EQ(back.transitions.size(), ts.size());
  EXPECT_EQ(back.normalizer.feature_lo, norm.feature_lo);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    EXPECT_EQ(back.transitions[i].state, ts[i].state);
    EXPECT_EQ(back.transitions[i].next_state, ts[i].next_state);
    EXPECT_EQ(back.transitions[i].action, ts[i].action);
    EXPECT_EQ(back.transitions[i].reward, ts[i].reward);
    EXPECT_EQ(back.transitions[i].terminal, ts[i].terminal);
  }
}

TEST(Records, RejectsUnknownVersionAndSchema) {
  std::stringstream v2(R"({"schema":"scaffold-session-log","version":2,"config_hash":"x","master_seed":1})"
                       "\n");
  EXPECT_ERRC(read_session_logs(v2), Errc::RecordFormat);
  std::stringstream wrong(R"({"schema":"scaffold-transitions","version":1,"config_hash":"x","master_seed":1})"
                          "\n");
  EXPECT_ERRC(read_session_logs(wrong), Errc::RecordFormat);
  std::stringstream empty;
  EXPECT_ERRC(read_transitions(empty), Errc::RecordFormat);
  std::stringstream bad(R"({"schema":"scaffold-session-log","version":1,"config_hash":"x","master_seed":1})"
                        "\n{\"student_id\": 3}\n");
  try {
    read_session_logs(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RecordFormat);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

class ReportTest : public ::testing::Test {
 protected:
  static const sim::TrialResult& trial() {
    static const sim::TrialResult r = [] {
      const std::vector<bkt::HistoricalStudent> history{
          sim::to_historical(context().run(sim::Phase::History, 0, sim::Condition::Control, {})),
          sim::to_historical(context().run(sim::Phase::History, 1, sim::Condition::Control, {}))};
      static const auto thr = bkt::compute_thresholds(history);
      static drl::TrainedPolicy pol;
      pol.network = drl::QNetwork({drl::kStateSize, 4, 3});
      pol.network.layers().back().bias(1) = 1.0;
      pol.normalizer.feature_lo.assign(drl::kStateSize, 0.0);
      pol.normalizer.feature_hi.assign(drl::kStateSize, 100.0);
      for (auto& t : pol.normalizer.level_time) t = {10.0, 1000.0};
      return sim::run_trial(context(), 15, sim::Policies{&thr, &pol});
    }();
    return r;
  }
  static RecordHeader header() { return RecordHeader{"", 1, "feedface", 3, "report"}; }
};

TEST_F(ReportTest, ThreePairwiseComparisonsPerMetric) {
  const auto r = build_report(trial().logs, header(), 200);
  ASSERT_EQ(r.posttest.size(), 5u);
  EXPECT_EQ(r.posttest.front().metric, "Score");
  for (const auto& m : r.posttest) {
    ASSERT_EQ(m.tests.size(), 3u);
    for (const auto& t : m.tests) {
      EXPECT_GE(t.p_adjusted, t.p);
      EXPECT_LE(t.p_adjusted, 1.0);
      ASSERT_TRUE(t.effect.has_value());
      EXPECT_LE(t.effect->ci_low, t.effect->a);
      EXPECT_GE(t.effect->ci_high, t.effect->a);
    }
  }
  EXPECT_EQ(r.types.tests.size(), 3u);
}

TEST_F(ReportTest, PercentagesClose) {
  const auto r = build_report(trial().logs, header(), 200);
  for (const auto& row : r.types.percent) EXPECT_NEAR(row[0] + row[1] + row[2], 100.0, 0.1);
  int students = 0;
  for (const auto& s : r.subgroups) students += static_cast<int>(s.low_pre.n + s.high_pre.n);
  EXPECT_EQ(students, 15);
}

TEST_F(ReportTest, IdenticalConditionsHaveNoStars) {
  std::vector<sim::SessionLog> logs;
  for (int k = 0; k < 4; ++k) {
    const auto base = context().run(sim::Phase::Trial, k, sim::Condition::Control, {});
    for (auto c : sim::kConditions) {
      auto copy = base;
      copy.condition = c;
      logs.push_back(copy);
    }
  }
  const auto r = build_report(logs, header(), 200);
  for (const auto& m : r.posttest) {
    for (const auto& t : m.tests) EXPECT_DOUBLE_EQ(t.p_adjusted, 1.0);
  }
  for (const auto& t : r.types.tests) EXPECT_DOUBLE_EQ(t.p_adjusted, 1.0);
  for (auto f : {ReportFormat::Text, ReportFormat::Delimited}) {
    const auto text = render_report(r, f);
    const auto body = text.substr(0, text.find("Notes:"));
    EXPECT_EQ(body.find('*'), std::string::npos);
    EXPECT_EQ(body.find("†"), std::string::npos);
  }
}

TEST_F(ReportTest, RenderingCarriesHeaderAndFooter) {
  const auto r = build_report(trial().logs, header(), 200);
  const auto text = render_report(r, ReportFormat::Text);
  EXPECT_EQ(text.rfind("config_hash feedface  master_seed 3", 0), 0u);
  EXPECT_NE(text.find("Mixed-effects regression"), std::string::npos);
  EXPECT_NE(text.find("Yates"), std::string::npos);
  const auto tsv = render_report(r, ReportFormat::Delimited);
  EXPECT_EQ(tsv.rfind("# config_hash feedface", 0), 0u);
  EXPECT_NE(tsv.find("Control vs BKT\t"), std::string::npos);
}

TEST_F(ReportTest, IncompleteTrialRejected) {
  auto logs = trial().logs;
  logs.front().attempts.pop_back();
  EXPECT_ERRC(build_report(logs, header(), 200), Errc::IncompleteTrial);
  std::vector<sim::SessionLog> only_control;
  for (const auto& l : trial().logs) {
    if (l.condition == sim::Condition::Control) only_control.push_back(l);
  }
  EXPECT_ERRC(build_report(only_control, header(), 200), Errc::IncompleteTrial);
}

TEST(SignificanceMark, Thresholds) {
  EXPECT_EQ(significance_mark(0.049), "*");
  EXPECT_EQ(significance_mark(0.05), "†");
  EXPECT_EQ(significance_mark(0.099), "†");
  EXPECT_EQ(significance_mark(0.10), "");
}

TEST(Pipeline, IncrementalRerunsAndDeterminism) {
  const auto dir = scratch("pipeline");
  const auto config = small_config(dir);
  const auto run_dir = run_directory(config);

  auto ran = [](const std::vector<PhaseResult>& r) {
    std::vector<std::string> names;
    for (const auto& p : r) {
      if (p.ran) names.push_back(p.name);
    }
    return names;
  };
  const auto first = run_pipeline(config, run_dir);
  EXPECT_EQ(ran(first).size(), 6u);
  const auto report = read_file(run_dir / artifact::kReportText);
  const auto model = read_file(run_dir / artifact::kModel);
  const auto trial = read_file(run_dir / artifact::kTrial);

  EXPECT_TRUE(ran(run_pipeline(config, run_dir)).empty());

  fs::remove(run_dir / artifact::kModel);
  EXPECT_EQ(ran(run_pipeline(config, run_dir)), (std::vector<std::string>{"train", "trial", "report"}));
  EXPECT_EQ(read_file(run_dir / artifact::kModel), model);
  EXPECT_EQ(read_file(run_dir / artifact::kReportText), report);

  EXPECT_EQ(ran(run_pipeline(config, run_dir, {true, {}})).size(), 6u);
  EXPECT_EQ(read_file(run_dir / artifact::kTrial), trial);

  // Every artifact names the config hash.
  const auto hash = config_hash(config);
  for (const char* name : {artifact::kConfig, artifact::kHistory, artifact::kThresholds, artifact::kCorpus,
                           artifact::kTransitions, artifact::kModel, artifact::kTrial, artifact::kReportText,
                           artifact::kReportTsv}) {
    EXPECT_NE(read_file(run_dir / name).find(hash), std::string::npos) << name;
  }
  EXPECT_TRUE(load_config(run_dir / artifact::kConfig) == config);
  fs::remove_all(dir);
}

TEST(Pipeline, PhaseErrorsNameThePhase) {
  const auto dir = scratch("broken");
  const auto config = small_config(dir);
  const auto run_dir = run_directory(config);
  run_pipeline(config, run_dir);
  write_file(run_dir / artifact::kTransitions, "{\"schema\":\"scaffold-transitions\",\"version\":9}\n");
  fs::remove(run_dir / artifact::kModel);
  try {
    run_pipeline(config, run_dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RecordFormat);
    EXPECT_NE(std::string(e.what()).find("phase train"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("model.json"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace scaffold::experiment
