#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "scaffold/drl/ddqn.hpp"
#include "scaffold/sim/experiment.hpp"

namespace scaffold::experiment {

struct PopulationSizes {
  int history = 721;
  int drl_corpus = 103;
  int trial = 113;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 20240917;
  std::filesystem::path bank;        // absolute after loading
  std::filesystem::path output_dir = "out";
  PopulationSizes population;
  sim::SimConfig sim;                // sim.master_seed mirrors master_seed
  drl::DdqnConfig drl;
  int bootstrap_iterations = 2000;

  /// Compares the resolved form, so equal configs echo identically.
  bool operator==(const ExperimentConfig& other) const;
};

/// Bank shipped with the sources.
std::filesystem::path default_bank_dir();

/// Environment variable that overrides the configured output root.
inline constexpr const char* kOutputRootEnv = "SCAFFOLD_OUTPUT_ROOT";

/// Parses TOML text; relative paths resolve against base_dir. Throws
/// Error{ConfigError} naming the dotted field path, Error{UnknownField} for
/// keys outside the schema.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);

/// Throws Error{ConfigError} when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included, in the same TOML schema. Output root and
/// worker count are included; they are excluded from the hash.
std::string resolved_toml(const ExperimentConfig& config);

/// Hex SHA-256 prefix over everything that affects results: the resolved
/// config without bank path, output root and worker count, plus the bank's
/// file contents.
std::string config_hash(const ExperimentConfig& config);

/// Output root (environment, else config) joined with the config hash.
std::filesystem::path run_directory(const ExperimentConfig& config);

}  // namespace scaffold::experiment
