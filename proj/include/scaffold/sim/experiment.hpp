#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "scaffold/sim/session.hpp"

namespace scaffold::sim {

struct SimConfig {
  std::uint64_t master_seed = 20240917;
  PopulationParams population;
  AttemptModel attempt;
  bkt::BktParams knowledge;
  scoring::ScoreWeights weights;
  double guided_fraction = 1.0;
  int buggy_count = 2;
  int calibration_students = 200;
  double fast_quantile = 0.10;
  double slow_quantile = 0.90;
  int workers = 0;  // 0 = hardware concurrency
};

enum class Phase : std::uint32_t { Calibration = 1, History = 2, Corpus = 3, Trial = 4 };

/// Independent stream for (phase, student, purpose) under the master seed.
std::uint64_t derive_seed(std::uint64_t master, Phase phase, std::uint64_t index, std::uint32_t purpose);

/// Shared, read-only simulation state: curriculum, variants and the per-level
/// time bounds from a calibration pass of unscaffolded PS attempts.
class SimContext {
 public:
  SimContext(const logic::ProblemBank& bank, SimConfig config);

  const SimConfig& config() const { return config_; }
  const Curriculum& curriculum() const { return curriculum_; }
  const VariantCache& variants() const { return variants_; }
  const SessionSettings& settings() const { return settings_; }

  SimStudentParams student(Phase phase, int index) const;
  std::string student_id(Phase phase, int index) const;

  SessionLog run(Phase phase, int index, Condition condition, const Policies& policies,
                 bool stop_after_pretest = false) const;

 private:
  SimConfig config_;
  Curriculum curriculum_;
  VariantCache variants_;
  SessionSettings settings_;
};

/// Runs fn(i) for i in [0, n) on a worker pool; the first exception is
/// rethrown after all workers join.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

/// Sessions under the uniform policy (historical and DRL corpora).
std::vector<SessionLog> run_random_cohort(const SimContext& ctx, Phase phase, int n);

struct TrialResult {
  std::vector<double> pretest_scores;
  std::vector<Condition> assignment;
  std::vector<SessionLog> logs;
};

/// Pretest everyone, stratify on the pretest, then run each student's full
/// session under the assigned condition. Throws Error{TooFewStudents}.
TrialResult run_trial(const SimContext& ctx, int n, const Policies& policies);

}  // namespace scaffold::sim
