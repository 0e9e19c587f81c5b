#include "scaffold/sim/student.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "scaffold/error.hpp"

namespace scaffold::sim {
namespace {

double beta(double a, double b, std::mt19937_64& rng) {
  std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
  const double x = ga(rng), y = gb(rng);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

std::size_t rule_slot(RuleId r) { return logic::index_of(r); }

std::vector<RuleId> solution_rules(const logic::Problem& p) {
  std::set<RuleId> rules;
  for (const auto& n : p.reference_solution.nodes) {
    if (n.justification.rule) rules.insert(*n.justification.rule);
  }
  return {rules.begin(), rules.end()};
}

const logic::ProofNode& node(const logic::Problem& p, const std::string& id) {
  const auto* n = p.reference_solution.find(id);
  if (!n) throw Error(Errc::MissingVariant, "variant refers to unknown node " + id + " of " + p.id);
  return *n;
}

}  // namespace

void SimStudentParams::validate() const {
  auto bad = [](const std::string& m) { throw Error(Errc::InvalidArgument, m); };
  if (!(slip >= 0.0 && slip < 0.5)) bad("slip must lie in [0, 0.5)");
  if (!(guess >= 0.0 && guess < 0.5)) bad("guess must lie in [0, 0.5)");
  for (double g : {gains.ps, gains.guided, gains.buggy}) {
    if (!(g >= 0.0 && g <= 0.3)) bad("learning gains must lie in [0, 0.3]");
  }
  for (double m : mastery) {
    if (!(m >= 0.0 && m <= 1.0)) bad("mastery must lie in [0, 1]");
  }
  if (!(speed > 0.0)) bad("speed must be positive");
  if (!(hint_propensity >= 0.0 && hint_propensity <= 1.0)) bad("hint propensity must lie in [0, 1]");
}

void PopulationParams::validate() const {
  auto bad = [](const std::string& m) { throw Error(Errc::InvalidArgument, m); };
  if (!(ability_alpha > 0.0 && ability_beta > 0.0 && rule_concentration > 0.0)) bad("Beta parameters must be positive");
  for (double g : {gain_mean.ps, gain_mean.guided, gain_mean.buggy}) {
    if (!(g >= 0.0 && g <= 0.3)) bad("mean gains must lie in [0, 0.3]");
  }
  if (!(slip_lo >= 0.0 && slip_lo <= slip_hi && slip_hi < 0.5)) bad("slip range must lie in [0, 0.5)");
  if (!(guess_lo >= 0.0 && guess_lo <= guess_hi && guess_hi < 0.5)) bad("guess range must lie in [0, 0.5)");
  if (!(hint_lo >= 0.0 && hint_lo <= hint_hi && hint_hi <= 1.0)) bad("hint range must lie in [0, 1]");
  if (!(gain_jitter >= 0.0 && speed_sigma >= 0.0)) bad("spreads must be non-negative");
}

SimStudentParams sample_student(const PopulationParams& pop, std::mt19937_64& rng) {
  SimStudentParams s;
  const double ability = std::clamp(beta(pop.ability_alpha, pop.ability_beta, rng), 0.01, 0.99);
  for (auto& m : s.mastery) {
    m = beta(pop.rule_concentration * ability, pop.rule_concentration * (1.0 - ability), rng);
  }
  std::normal_distribution<double> jitter(0.0, pop.gain_jitter);
  auto gain = [&](double mean) { return std::clamp(mean * std::exp(jitter(rng)), 0.0, 0.3); };
  s.gains = {gain(pop.gain_mean.ps), gain(pop.gain_mean.guided), gain(pop.gain_mean.buggy)};
  s.slip = std::uniform_real_distribution<double>(pop.slip_lo, pop.slip_hi)(rng);
  s.guess = std::uniform_real_distribution<double>(pop.guess_lo, pop.guess_hi)(rng);
  s.speed = std::exp(std::normal_distribution<double>(0.0, pop.speed_sigma)(rng));
  s.hint_propensity = std::uniform_real_distribution<double>(pop.hint_lo, pop.hint_hi)(rng);
  s.seed = rng();
  return s;
}

double correct_probability(double m, double slip, double guess) { return m * (1.0 - slip) + (1.0 - m) * guess; }

double learning_gain(ProblemType type, double m, const LearnGains& g) {
  switch (type) {
    case ProblemType::PS: return g.ps * (1.0 - m);
    case ProblemType::Guided: return g.guided * (1.0 - m);
    case ProblemType::Buggy: return g.buggy * m * (1.0 - m);
  }
  return 0.0;
}

VariantCache build_variants(const Curriculum& curriculum, double guided_fraction, int buggy_count, std::uint64_t seed) {
  VariantCache cache;
  std::uint64_t k = 0;
  for (const auto& slot : curriculum.slots()) {
    ++k;
    if (!slot.adaptive()) continue;
    const auto& p = curriculum.problem(slot);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    cache.guided.emplace(p.id, logic::make_guided(p, guided_fraction, rng()));
    cache.buggy.emplace(p.id, logic::make_buggy(p, buggy_count, rng()));
  }
  return cache;
}

AttemptResult simulate_attempt(const SimStudentParams& s, const Mastery& mastery, const logic::Problem& problem,
                               Stage stage, ProblemType type, const VariantCache& variants,
                               const AttemptModel& model, std::mt19937_64& rng) {
  AttemptResult out;
  out.mastery_after = mastery;
  auto& a = out.attempt;
  a.problem_id = problem.id;
  a.assigned_type = type;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  // The rules the student must supply, in order.
  std::vector<RuleId> tasks;
  if (stage != Stage::Intro) {
    switch (type) {
      case ProblemType::PS:
        for (const auto& n : problem.reference_solution.nodes) {
          if (n.justification.rule) tasks.push_back(*n.justification.rule);
        }
        break;
      case ProblemType::Guided: {
        auto it = variants.guided.find(problem.id);
        if (it == variants.guided.end()) throw Error(Errc::MissingVariant, "no Guided variant for " + problem.id);
        for (const auto& id : it->second.missing_justifications) tasks.push_back(*node(problem, id).justification.rule);
        break;
      }
      case ProblemType::Buggy: {
        auto it = variants.buggy.find(problem.id);
        if (it == variants.buggy.end()) throw Error(Errc::MissingVariant, "no Buggy variant for " + problem.id);
        for (const auto& bug : it->second.bugs) tasks.push_back(*node(problem, bug.node_id).justification.rule);
        break;
      }
    }
  }

  int extra_steps = 0;
  double mastery_sum = 0.0;
  for (RuleId r : tasks) {
    const double m = mastery[rule_slot(r)];
    mastery_sum += m;
    const double p = correct_probability(m, s.slip, s.guess);
    for (int tries = 1;; ++tries) {
      const bool ok = u(rng) < p;
      a.rule_applications.push_back({r, ok});
      if (ok) break;
      if (type == ProblemType::PS && u(rng) < model.detour_probability) ++extra_steps;
      if (tries >= model.max_tries || u(rng) < s.hint_propensity) {
        ++a.hints_requested;
        break;
      }
    }
  }
  a.steps_in_final_solution = static_cast<int>(problem.reference_steps()) + extra_steps;

  double factor = 1.0;
  if (stage == Stage::Intro) {
    factor = model.intro_time_factor;
  } else if (type == ProblemType::Guided) {
    factor = model.guided_time_factor;
  } else if (type == ProblemType::Buggy) {
    factor = model.buggy_time_factor;
  }
  // Reading a worked example and scanning a buggy one both cover every step.
  double actions = static_cast<double>(a.rule_applications.size());
  if (stage == Stage::Intro) actions = static_cast<double>(problem.reference_steps());
  if (type == ProblemType::Buggy && stage != Stage::Intro) actions += static_cast<double>(problem.reference_steps());
  const double mean_mastery = tasks.empty() ? 0.5 : mastery_sum / static_cast<double>(tasks.size());
  const double noise = std::exp(std::normal_distribution<double>(0.0, model.duration_sigma)(rng));
  a.duration_seconds = s.speed * (model.seconds_per_action * std::max(1.0, actions) * factor * (1.6 - mean_mastery) +
                                  model.hint_seconds * a.hints_requested) *
                       noise;

  if (stage == Stage::Pretest || stage == Stage::LevelEnd || stage == Stage::Posttest) return out;
  for (RuleId r : solution_rules(problem)) {
    double& m = out.mastery_after[rule_slot(r)];
    if (stage == Stage::Intro) {
      m += model.intro_gain * (1.0 - m);
    } else {
      m += learning_gain(type, m, s.gains);
    }
    m = std::clamp(m, 0.0, 1.0);
  }
  return out;
}

}  // namespace scaffold::sim
