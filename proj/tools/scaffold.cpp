// Command-line front end for the simulation and analysis pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "scaffold/error.hpp"
#include "scaffold/experiment/pipeline.hpp"
#include "scaffold/logic/bank.hpp"
#include "scaffold/logic/variants.hpp"
#include "scaffold/sim/curriculum.hpp"

namespace fs = std::filesystem;
using namespace scaffold;
using namespace scaffold::experiment;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "Experiment TOML file (defaults apply when omitted)");
  cmd->add_option("--seed", c.seed, "Override the master seed");
}

ExperimentConfig resolve(const Common& c) {
  auto config = c.config.empty() ? parse_config("", fs::current_path()) : load_config(c.config);
  if (c.seed) {
    config.master_seed = *c.seed;
    config.sim.master_seed = *c.seed;
  }
  return config;
}

fs::path run_dir(const Common& c, const ExperimentConfig& config) {
  return c.out.empty() ? run_directory(config) : fs::path(c.out);
}

void say(const std::string& s) { std::cerr << s << "\n"; }

int validate_problems(const std::string& bank_dir) {
  const auto bank = logic::load_bank(bank_dir.empty() ? default_bank_dir() : fs::path(bank_dir));
  auto issues = logic::validate_bank(bank);
  const auto trips = logic::check_round_trips(bank, 2, 4);
  issues.insert(issues.end(), trips.begin(), trips.end());
  try {
    sim::Curriculum curriculum(bank);
  } catch (const Error& e) {
    issues.push_back({"curriculum", e.what()});
  }
  for (const auto& i : issues) std::cout << "FAIL " << i.problem_id << ": " << i.message << "\n";
  std::cout << bank.size() << " problems, " << issues.size() << " issue(s)\n";
  return issues.empty() ? 0 : 1;
}

int eval_policy(const std::string& model_path, const std::string& transitions_path) {
  const auto policy = drl::policy_from_json(read_file(model_path));
  std::cout << "network";
  for (int d : policy.network.dims()) std::cout << " " << d;
  std::cout << "\nbest epoch " << policy.best_epoch << " of " << policy.loss_curve.size() << ", training "
            << policy.training_size << ", held out " << policy.held_out_size << "\n";
  if (!policy.loss_curve.empty()) {
    const auto& best = policy.loss_curve[static_cast<std::size_t>(std::max(0, policy.best_epoch - 1))];
    std::cout << "held-out MSE at best epoch " << best.held_out_mse << "\n";
  }
  if (transitions_path.empty()) return 0;
  std::ifstream in(transitions_path, std::ios::binary);
  if (!in) throw Error(Errc::RecordFormat, "cannot read " + transitions_path);
  const auto file = read_transitions(in);
  std::array<int, 3> picks{};
  std::array<double, 3> q_sum{};
  int agree = 0;
  for (const auto& t : file.transitions) {
    const auto choice = drl::select_action(policy, t.state);
    ++picks[index_of(choice.action)];
    for (std::size_t a = 0; a < 3; ++a) q_sum[a] += choice.q[a];
    agree += choice.action == t.action ? 1 : 0;
  }
  const double n = static_cast<double>(file.transitions.size());
  std::cout << "states " << file.transitions.size() << "\n";
  for (ProblemType t : kProblemTypes) {
    const auto i = index_of(t);
    std::cout << "  " << to_string(t) << ": greedy " << picks[i] << " (" << 100.0 * picks[i] / n << "%), mean Q "
              << q_sum[i] / n << "\n";
  }
  std::cout << "agreement with logged actions " << 100.0 * agree / n << "%\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulated tutoring experiment: problem bank checks, simulation, policy training and reports"};
  app.require_subcommand(1);

  std::string bank_dir;
  auto* validate = app.add_subcommand("validate-problems", "Check bank invariants and variant round trips");
  validate->add_option("--bank", bank_dir, "Problem bank directory");

  Common sim_opts;
  std::string phase, thresholds_in, model_in;
  auto* simulate = app.add_subcommand("simulate", "Simulate one phase into the run directory");
  add_common(simulate, sim_opts);
  simulate->add_option("--phase", phase, "history | drl-corpus | trial")
      ->required()
      ->check(CLI::IsMember({"history", "drl-corpus", "trial"}));
  simulate->add_option("-o,--out", sim_opts.out, "Run directory (default: output root / config hash)");
  simulate->add_option("--thresholds", thresholds_in, "Thresholds for the trial phase");
  simulate->add_option("--model", model_in, "Model for the trial phase");

  Common thr_opts;
  std::string history_in, thresholds_out;
  auto* thresholds = app.add_subcommand("bkt-thresholds", "Per-position rule thresholds from historical logs");
  add_common(thresholds, thr_opts);
  thresholds->add_option("history", history_in, "Historical session logs (JSONL)")->required();
  thresholds->add_option("-o,--output", thresholds_out, "Output thresholds JSON")->required();

  Common train_opts;
  std::string transitions_in, model_out;
  auto* train = app.add_subcommand("train-drl", "Train the offline DDQN policy");
  add_common(train, train_opts);
  train->add_option("transitions", transitions_in, "Transitions (JSONL)")->required();
  train->add_option("-o,--output", model_out, "Output model JSON")->required();

  std::string model_eval, transitions_eval;
  auto* eval = app.add_subcommand("eval-policy", "Summarize a trained policy");
  eval->add_option("model", model_eval, "Model JSON")->required();
  eval->add_option("--transitions", transitions_eval, "Score the policy's greedy choices on these transitions");

  Common report_opts;
  std::string trial_in;
  auto* report = app.add_subcommand("report", "Statistical report of a trial");
  add_common(report, report_opts);
  report->add_option("--trial", trial_in, "Trial session logs (default: run directory)");
  report->add_option("-o,--out", report_opts.out, "Run directory (default: output root / config hash)");

  Common pipe_opts;
  bool force = false;
  auto* pipeline = app.add_subcommand("pipeline", "Run every phase, skipping up-to-date ones");
  add_common(pipeline, pipe_opts);
  pipeline->add_option("-o,--out", pipe_opts.out, "Run directory (default: output root / config hash)");
  pipeline->add_flag("--force", force, "Rerun every phase");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return validate_problems(bank_dir);

    if (*simulate) {
      const auto config = resolve(sim_opts);
      const auto dir = run_dir(sim_opts, config);
      const auto bank = logic::load_bank(config.bank);
      const sim::SimContext ctx(bank, config.sim);
      if (phase == "history") {
        write_file(dir / artifact::kHistory, simulate_history(config, ctx));
        say("wrote " + (dir / artifact::kHistory).string());
      } else if (phase == "drl-corpus") {
        auto [corpus, transitions] = simulate_corpus(config, ctx);
        write_file(dir / artifact::kCorpus, corpus);
        write_file(dir / artifact::kTransitions, transitions);
        say("wrote " + (dir / artifact::kCorpus).string() + " and " + (dir / artifact::kTransitions).string());
      } else {
        const auto t = thresholds_in.empty() ? dir / artifact::kThresholds : fs::path(thresholds_in);
        const auto m = model_in.empty() ? dir / artifact::kModel : fs::path(model_in);
        write_file(dir / artifact::kTrial, simulate_trial(config, ctx, read_file(t), read_file(m)));
        say("wrote " + (dir / artifact::kTrial).string());
      }
      return 0;
    }

    if (*thresholds) {
      const auto config = resolve(thr_opts);
      write_file(thresholds_out, thresholds_from_history(config, read_file(history_in)));
      say("wrote " + thresholds_out);
      return 0;
    }

    if (*train) {
      const auto config = resolve(train_opts);
      write_file(model_out, train_from_transitions(config, read_file(transitions_in)));
      say("wrote " + model_out);
      return 0;
    }

    if (*eval) return eval_policy(model_eval, transitions_eval);

    if (*report) {
      const auto config = resolve(report_opts);
      const auto dir = run_dir(report_opts, config);
      const auto trial = trial_in.empty() ? dir / artifact::kTrial : fs::path(trial_in);
      auto [text, tsv] = report_from_trial(config, read_file(trial));
      write_file(dir / artifact::kReportText, text);
      write_file(dir / artifact::kReportTsv, tsv);
      std::cout << text;
      return 0;
    }

    if (*pipeline) {
      const auto config = resolve(pipe_opts);
      const auto dir = run_dir(pipe_opts, config);
      say("run directory " + dir.string());
      run_pipeline(config, dir, {force, say});
      std::cout << read_file(dir / artifact::kReportText);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
