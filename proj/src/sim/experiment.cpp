#include "scaffold/sim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "scaffold/error.hpp"

namespace scaffold::sim {
namespace {

enum Purpose : std::uint32_t { kParams = 1, kAttempts = 2, kPolicy = 3, kAssignment = 4, kVariants = 5 };

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(v.size() - 1, lo + 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

const char* phase_prefix(Phase p) {
  switch (p) {
    case Phase::Calibration: return "K";
    case Phase::History: return "H";
    case Phase::Corpus: return "C";
    case Phase::Trial: return "T";
  }
  return "?";
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, Phase phase, std::uint64_t index, std::uint32_t purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(phase), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32), purpose};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

SimContext::SimContext(const logic::ProblemBank& bank, SimConfig config)
    : config_(std::move(config)), curriculum_(bank) {
  config_.population.validate();
  config_.knowledge.validate();
  if (config_.calibration_students < 2) throw Error(Errc::InvalidArgument, "calibration needs at least 2 students");
  if (!(config_.fast_quantile >= 0.0 && config_.fast_quantile < config_.slow_quantile && config_.slow_quantile <= 1.0)) {
    throw Error(Errc::InvalidArgument, "time quantiles must satisfy 0 <= fast < slow <= 1");
  }
  variants_ = build_variants(curriculum_, config_.guided_fraction, config_.buggy_count,
                             derive_seed(config_.master_seed, Phase::Calibration, 0, kVariants));
  settings_.attempt = config_.attempt;
  settings_.knowledge = config_.knowledge;
  settings_.weights = config_.weights;

  std::map<int, std::vector<double>> durations;
  for (int i = 0; i < config_.calibration_students; ++i) {
    const auto s = student(Phase::Calibration, i);
    std::mt19937_64 rng(derive_seed(config_.master_seed, Phase::Calibration, static_cast<std::uint64_t>(i), kAttempts));
    for (const auto& slot : curriculum_.slots()) {
      if (slot.stage == Stage::Intro) continue;
      const auto r = simulate_attempt(s, s.mastery, curriculum_.problem(slot), Stage::Pretest, ProblemType::PS,
                                      variants_, config_.attempt, rng);
      durations[slot.level].push_back(r.attempt.duration_seconds);
    }
  }
  for (auto& [level, d] : durations) {
    auto& b = settings_.time_bounds[static_cast<std::size_t>(level)];
    b.fast = quantile(d, config_.fast_quantile);
    b.slow = std::max(quantile(d, config_.slow_quantile), b.fast + 1.0);
  }
}

SimStudentParams SimContext::student(Phase phase, int index) const {
  std::mt19937_64 rng(derive_seed(config_.master_seed, phase, static_cast<std::uint64_t>(index), kParams));
  return sample_student(config_.population, rng);
}

std::string SimContext::student_id(Phase phase, int index) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%04d", phase_prefix(phase), index + 1);
  return buf;
}

SessionLog SimContext::run(Phase phase, int index, Condition condition, const Policies& policies,
                           bool stop_after_pretest) const {
  const auto i = static_cast<std::uint64_t>(index);
  const SessionSeeds seeds{derive_seed(config_.master_seed, phase, i, kAttempts),
                           derive_seed(config_.master_seed, phase, i, kPolicy)};
  return run_session(student(phase, index), student_id(phase, index), index, condition, curriculum_, variants_,
                     settings_, policies, seeds, stop_after_pretest);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SessionLog> run_random_cohort(const SimContext& ctx, Phase phase, int n) {
  if (n < 1) throw Error(Errc::InvalidArgument, "cohort size must be positive");
  std::vector<SessionLog> logs(static_cast<std::size_t>(n));
  parallel_for(n, ctx.config().workers,
               [&](int i) { logs[static_cast<std::size_t>(i)] = ctx.run(phase, i, Condition::Control, {}); });
  return logs;
}

TrialResult run_trial(const SimContext& ctx, int n, const Policies& policies) {
  if (n < 3) throw Error(Errc::TooFewStudents, "a trial needs at least 3 students");
  TrialResult out;
  out.pretest_scores.resize(static_cast<std::size_t>(n));
  parallel_for(n, ctx.config().workers, [&](int i) {
    out.pretest_scores[static_cast<std::size_t>(i)] =
        ctx.run(Phase::Trial, i, Condition::Control, {}, true).pretest_score;
  });
  std::mt19937_64 rng(derive_seed(ctx.config().master_seed, Phase::Trial, 0, kAssignment));
  out.assignment = stratified_assign(out.pretest_scores, rng);
  out.logs.resize(static_cast<std::size_t>(n));
  parallel_for(n, ctx.config().workers, [&](int i) {
    out.logs[static_cast<std::size_t>(i)] = ctx.run(Phase::Trial, i, out.assignment[static_cast<std::size_t>(i)], policies);
  });
  return out;
}

}  // namespace scaffold::sim
