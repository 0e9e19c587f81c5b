#include "scaffold/logic/variants.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "scaffold/error.hpp"

namespace scaffold::logic {

namespace {

std::string hint_for(const ProofNode& node) {
  std::string parents;
  for (const auto& p : node.justification.parents) {
    if (!parents.empty()) parents += ", ";
    parents += p;
  }
  return "Apply " + std::string(rule_info(*node.justification.rule).hint_class) +
         " to the highlighted parents (" + parents + ") to justify " + node.id;
}

void apply_value(ProofNode& node, const BugValue& value) {
  if (const auto* f = std::get_if<Formula>(&value)) {
    node.formula = *f;
  } else {
    node.justification.rule = std::get<RuleId>(value);
  }
}

BugValue current_value(const ProofNode& node, BugKind kind) {
  if (kind == BugKind::Statement) return node.formula;
  return *node.justification.rule;
}

bool same_value(const BugValue& a, const BugValue& b) {
  if (a.index() != b.index()) return false;
  if (const auto* f = std::get_if<Formula>(&a)) return *f == std::get<Formula>(b);
  return std::get<RuleId>(a) == std::get<RuleId>(b);
}

bool invalid(const ProofGraph& g, const Formula& conclusion) {
  return !validate_proof(g, conclusion).valid;
}

// Statement corruptions: wrong conjunct kept by Simp, dropped (or added)
// negation, swapped operands of an asymmetric connective.
std::vector<Formula> statement_mutations(const ProofGraph& g, const ProofNode& n) {
  std::vector<Formula> out;
  const Formula& f = n.formula;
  if (n.justification.rule == RuleId::Simp && n.justification.parents.size() == 1) {
    const Formula& parent = g.at(n.justification.parents[0]).formula;
    if (parent.is(Connective::And)) {
      const Formula& other = parent.left() == f ? parent.right() : parent.left();
      if (!(other == f)) out.push_back(other);
    }
  }
  out.push_back(f.is(Connective::Not) ? f.child() : Formula::negation(f));
  if (f.is(Connective::Implies)) {
    Formula swapped = Formula::implication(f.right(), f.left());
    if (!(swapped == f)) out.push_back(swapped);
  }
  return out;
}

std::vector<RuleId> rule_mutations(const ProofGraph& g, const ProofNode& n) {
  std::vector<Formula> premises;
  for (const auto& p : n.justification.parents) premises.push_back(g.at(p).formula);
  std::vector<RuleId> out;
  for (RuleId r : kAllRules) {
    if (r == *n.justification.rule) continue;
    bool derives = false;
    try {
      derives = check_rule_application(r, premises, n.formula);
    } catch (const Error&) {
      derives = false;
    }
    if (!derives) out.push_back(r);
  }
  return out;
}

}  // namespace

std::string to_string(const BugValue& value) {
  if (const auto* f = std::get_if<Formula>(&value)) return render(*f);
  return std::string(to_string(std::get<RuleId>(value)));
}

GuidedVariant make_guided(const Problem& problem, double removal_fraction, std::uint64_t seed) {
  if (!(removal_fraction > 0.0 && removal_fraction <= 1.0)) {
    throw Error(Errc::InvalidArgument, "removal fraction must lie in (0, 1]");
  }
  const ProofGraph& ref = problem.reference_solution;
  std::vector<std::size_t> derived;
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    if (ref.nodes[i].is_derived()) derived.push_back(i);
  }
  if (derived.size() < 2) {
    throw Error(Errc::NoDerivedNodes, "problem " + problem.id + " has fewer than two derived nodes");
  }
  const auto want = static_cast<std::size_t>(
      std::ceil(removal_fraction * static_cast<double>(derived.size()) - 1e-9));

  std::mt19937_64 rng(seed);
  std::shuffle(derived.begin(), derived.end(), rng);
  derived.resize(want);
  std::sort(derived.begin(), derived.end());

  GuidedVariant v{problem.id, ref, {}, {}};
  for (std::size_t i : derived) {
    ProofNode& node = v.nodes.nodes[i];
    v.hints[node.id] = hint_for(node);
    v.missing_justifications.push_back(node.id);
    node.justification = Justification::missing();
  }
  return v;
}

ProofGraph complete_guided(const GuidedVariant& variant, const Problem& problem) {
  ProofGraph g = variant.nodes;
  for (const auto& id : variant.missing_justifications) {
    g.at(id).justification = problem.reference_solution.at(id).justification;
  }
  return g;
}

BuggyVariant make_buggy(const Problem& problem, int bug_count, std::uint64_t seed) {
  const ProofGraph& ref = problem.reference_solution;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < ref.nodes.size(); ++i) {
    if (ref.nodes[i].is_derived() && ref.nodes[i].id != ref.conclusion_id) eligible.push_back(i);
  }
  if (bug_count < 1 || static_cast<std::size_t>(bug_count) > eligible.size()) {
    throw Error(Errc::BugBudgetExceeded,
                "requested " + std::to_string(bug_count) + " bugs, problem " + problem.id +
                    " allows 1.." + std::to_string(eligible.size()));
  }

  std::mt19937_64 rng(seed);
  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    std::vector<std::size_t> chosen = eligible;
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(static_cast<std::size_t>(bug_count));
    std::sort(chosen.begin(), chosen.end());

    BuggyVariant v{problem.id, ref, {}};
    for (std::size_t i : chosen) {
      const ProofNode& original = ref.nodes[i];
      std::vector<Bug> options;
      for (auto& f : statement_mutations(ref, original)) {
        options.push_back({original.id, BugKind::Statement, std::move(f), original.formula});
      }
      std::vector<Bug> rule_options;
      for (RuleId r : rule_mutations(ref, original)) {
        rule_options.push_back({original.id, BugKind::Rule, r, *original.justification.rule});
      }
      // Pick the kind first so statement and rule bugs are equally likely.
      std::vector<Bug>* pool = &options;
      if (options.empty() || (!rule_options.empty() && (rng() & 1u))) pool = &rule_options;

      std::shuffle(pool->begin(), pool->end(), rng);
      const Bug* picked = nullptr;
      for (const Bug& b : *pool) {
        ProofGraph single = ref;
        apply_value(single.nodes[i], b.corrupted);
        if (invalid(single, problem.conclusion)) {
          picked = &b;
          break;
        }
      }
      if (picked == nullptr) {
        // Rule swaps always fail locally.
        for (const Bug& b : rule_options) {
          picked = &b;
          break;
        }
      }
      if (picked == nullptr) break;
      apply_value(v.nodes.nodes[i], picked->corrupted);
      v.bugs.push_back(*picked);
    }
    if (v.bugs.size() == static_cast<std::size_t>(bug_count) && invalid(v.nodes, problem.conclusion)) {
      return v;
    }
  }
  throw Error(Errc::BugBudgetExceeded, "could not place detectable bugs in problem " + problem.id);
}

std::size_t remaining_bug_count(const BuggyVariant& variant) {
  return static_cast<std::size_t>(std::count_if(variant.bugs.begin(), variant.bugs.end(), [&](const Bug& b) {
    return !same_value(current_value(variant.nodes.at(b.node_id), b.kind), b.correct);
  }));
}

void fix_bug(BuggyVariant& variant, std::size_t index) {
  const Bug& b = variant.bugs.at(index);
  apply_value(variant.nodes.at(b.node_id), b.correct);
}

ProofGraph fix_all(const BuggyVariant& variant) {
  ProofGraph g = variant.nodes;
  for (const Bug& b : variant.bugs) apply_value(g.at(b.node_id), b.correct);
  return g;
}

std::vector<BankIssue> check_round_trips(const ProblemBank& bank, int bug_count, int seeds) {
  std::vector<BankIssue> issues;
  for (const auto& p : bank.problems()) {
    auto fail = [&](const std::string& m) { issues.push_back({p.id, m}); };
    try {
      if (!validate_proof(p.reference_solution, p.conclusion).valid) {
        fail("reference solution does not validate");
        continue;
      }
      for (int s = 0; s < seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        if (p.reference_steps() >= 2) {
          const auto g = make_guided(p, 1.0, seed);
          if (!validate_proof(complete_guided(g, p), p.conclusion).valid) fail("completed Guided variant is invalid");
        }
        std::optional<BuggyVariant> b;
        for (int k = bug_count; k >= 1 && !b; --k) {
          try {
            b = make_buggy(p, k, seed);
          } catch (const Error& e) {
            if (e.code() != Errc::BugBudgetExceeded || k == 1) throw;
          }
        }
        if (validate_proof(b->nodes, p.conclusion).valid) fail("Buggy variant validates before fixing");
        if (!validate_proof(fix_all(*b), p.conclusion).valid) fail("fixed Buggy variant is invalid");
      }
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  return issues;
}

}  // namespace scaffold::logic
