#include "scaffold/experiment/pipeline.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include "scaffold/error.hpp"
#include "scaffold/logic/bank.hpp"

namespace scaffold::experiment {
namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::RecordFormat, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(Errc::RecordFormat, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::RecordFormat, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RecordHeader make_header(const ExperimentConfig& config, const std::string& phase) {
  RecordHeader h;
  h.config_hash = config_hash(config);
  h.master_seed = config.master_seed;
  h.phase = phase;
  return h;
}

std::string simulate_history(const ExperimentConfig& config, const sim::SimContext& ctx) {
  const auto logs = sim::run_random_cohort(ctx, sim::Phase::History, config.population.history);
  std::ostringstream out;
  write_session_logs(out, make_header(config, "history"), logs);
  return out.str();
}

std::pair<std::string, std::string> simulate_corpus(const ExperimentConfig& config, const sim::SimContext& ctx) {
  const auto logs = sim::run_random_cohort(ctx, sim::Phase::Corpus, config.population.drl_corpus);
  std::vector<std::vector<drl::HistoryEvent>> histories;
  for (const auto& log : logs) histories.push_back(sim::history_events(log));
  const auto normalizer = drl::fit_normalizer(histories);
  std::vector<drl::Transition> transitions;
  for (const auto& log : logs) {
    auto t = sim::build_transitions(log, normalizer);
    transitions.insert(transitions.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  const auto header = make_header(config, "drl-corpus");
  std::ostringstream corpus, trans;
  write_session_logs(corpus, header, logs);
  write_transitions(trans, header, normalizer, transitions);
  return {corpus.str(), trans.str()};
}

std::string thresholds_from_history(const ExperimentConfig& config, const std::string& history_file) {
  std::istringstream in(history_file);
  const auto file = read_session_logs(in);
  std::vector<bkt::HistoricalStudent> history;
  for (const auto& log : file.logs) history.push_back(sim::to_historical(log));
  const auto table = bkt::compute_thresholds(history, config.sim.knowledge);
  auto header = make_header(config, "thresholds");
  header.schema = "scaffold-thresholds";
  auto meta = header.to_json();
  meta["students"] = history.size();
  return bkt::thresholds_to_json(table, meta.dump());
}

std::string train_from_transitions(const ExperimentConfig& config, const std::string& transitions_file) {
  std::istringstream in(transitions_file);
  const auto file = read_transitions(in);
  const auto policy = drl::train_ddqn(file.transitions, config.drl, file.normalizer);
  auto header = make_header(config, "train");
  header.schema = "scaffold-model";
  return drl::policy_to_json(policy, header.to_json());
}

std::string simulate_trial(const ExperimentConfig& config, const sim::SimContext& ctx, const std::string& thresholds_file,
                           const std::string& model_file) {
  const auto thresholds = bkt::thresholds_from_json(thresholds_file);
  const auto model = drl::policy_from_json(model_file);
  const auto result = sim::run_trial(ctx, config.population.trial, sim::Policies{&thresholds, &model});
  std::ostringstream out;
  write_session_logs(out, make_header(config, "trial"), result.logs);
  return out.str();
}

std::pair<std::string, std::string> report_from_trial(const ExperimentConfig& config, const std::string& trial_file) {
  std::istringstream in(trial_file);
  const auto file = read_session_logs(in);
  const auto report = build_report(file.logs, make_header(config, "report"), config.bootstrap_iterations);
  return {render_report(report, ReportFormat::Text), render_report(report, ReportFormat::Delimited)};
}

std::vector<PhaseResult> run_pipeline(const ExperimentConfig& config, const fs::path& run_dir,
                                      const PipelineOptions& options) {
  fs::create_directories(run_dir);
  const auto header = make_header(config, "config");
  write_file(run_dir / artifact::kConfig,
             "# config_hash " + header.config_hash + " master_seed " + std::to_string(header.master_seed) + "\n" +
                 resolved_toml(config));

  std::optional<logic::ProblemBank> bank;
  std::unique_ptr<sim::SimContext> ctx;
  auto context = [&]() -> const sim::SimContext& {
    if (!ctx) {
      bank = logic::load_bank(config.bank);
      ctx = std::make_unique<sim::SimContext>(*bank, config.sim);
    }
    return *ctx;
  };
  auto file = [&](const char* name) { return read_file(run_dir / name); };

  struct Phase {
    std::string name;
    std::vector<const char*> outputs;
    std::vector<std::string> depends;
    std::function<std::vector<std::string>()> run;
  };
  const std::vector<Phase> phases = {
      {"history", {artifact::kHistory}, {}, [&] { return std::vector{simulate_history(config, context())}; }},
      {"thresholds", {artifact::kThresholds}, {"history"},
       [&] { return std::vector{thresholds_from_history(config, file(artifact::kHistory))}; }},
      {"drl-corpus", {artifact::kCorpus, artifact::kTransitions}, {},
       [&] {
         auto [c, t] = simulate_corpus(config, context());
         return std::vector{c, t};
       }},
      {"train", {artifact::kModel}, {"drl-corpus"},
       [&] { return std::vector{train_from_transitions(config, file(artifact::kTransitions))}; }},
      {"trial", {artifact::kTrial}, {"thresholds", "train"},
       [&] {
         return std::vector{simulate_trial(config, context(), file(artifact::kThresholds), file(artifact::kModel))};
       }},
      {"report", {artifact::kReportText, artifact::kReportTsv}, {"trial"},
       [&] {
         auto [text, tsv] = report_from_trial(config, file(artifact::kTrial));
         return std::vector{text, tsv};
       }},
  };

  std::map<std::string, bool> ran;
  std::vector<PhaseResult> results;
  for (const auto& phase : phases) {
    PhaseResult res{phase.name, false, {}};
    bool dirty = options.force;
    for (const char* o : phase.outputs) {
      res.outputs.push_back(run_dir / o);
      dirty = dirty || !fs::exists(run_dir / o);
    }
    for (const auto& d : phase.depends) dirty = dirty || ran[d];
    if (dirty) {
      if (options.progress) options.progress("running " + phase.name);
      try {
        const auto contents = phase.run();
        for (std::size_t i = 0; i < contents.size(); ++i) write_file(res.outputs[i], contents[i]);
      } catch (const Error& e) {
        throw Error(e.code(), "phase " + phase.name + " (" + res.outputs.front().string() + "): " + e.what());
      }
      res.ran = true;
    } else if (options.progress) {
      options.progress("skipping " + phase.name + " (up to date)");
    }
    ran[phase.name] = res.ran;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace scaffold::experiment
