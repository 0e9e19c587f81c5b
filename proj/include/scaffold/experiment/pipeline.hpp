#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "scaffold/experiment/config.hpp"
#include "scaffold/experiment/records.hpp"
#include "scaffold/experiment/report.hpp"

namespace scaffold::experiment {

/// Artifact names inside a run directory.
namespace artifact {
inline constexpr const char* kConfig = "config.toml";
inline constexpr const char* kHistory = "history.jsonl";
inline constexpr const char* kThresholds = "thresholds.json";
inline constexpr const char* kCorpus = "corpus.jsonl";
inline constexpr const char* kTransitions = "transitions.jsonl";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kTrial = "trial.jsonl";
inline constexpr const char* kReportText = "report.txt";
inline constexpr const char* kReportTsv = "report.tsv";
}  // namespace artifact

/// Writes through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& content);
/// Throws Error{RecordFormat} when the file is missing.
std::string read_file(const std::filesystem::path& path);

RecordHeader make_header(const ExperimentConfig& config, const std::string& phase);

// Single steps, shared by the pipeline and the command-line verbs.
std::string simulate_history(const ExperimentConfig& config, const sim::SimContext& ctx);
/// Returns {corpus log file, transition file}.
std::pair<std::string, std::string> simulate_corpus(const ExperimentConfig& config, const sim::SimContext& ctx);
std::string thresholds_from_history(const ExperimentConfig& config, const std::string& history_file);
std::string train_from_transitions(const ExperimentConfig& config, const std::string& transitions_file);
std::string simulate_trial(const ExperimentConfig& config, const sim::SimContext& ctx,
                           const std::string& thresholds_file, const std::string& model_file);
/// Returns {text, delimited}.
std::pair<std::string, std::string> report_from_trial(const ExperimentConfig& config, const std::string& trial_file);

struct PhaseResult {
  std::string name;
  bool ran = false;
  std::vector<std::filesystem::path> outputs;
};

struct PipelineOptions {
  bool force = false;
  std::function<void(const std::string&)> progress;  // optional
};

/// history -> thresholds -> drl-corpus -> train -> trial -> report under
/// run_dir. A phase is skipped when all its outputs exist and no phase it
/// depends on ran; --force reruns everything. Errors are rethrown with the
/// phase name and artifact path.
std::vector<PhaseResult> run_pipeline(const ExperimentConfig& config, const std::filesystem::path& run_dir,
                                      const PipelineOptions& options = {});

}  // namespace scaffold::experiment
