#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scaffold/logic/formula.hpp"
#include "scaffold/logic/rules.hpp"

namespace scaffold::logic {

enum class JustificationKind : std::uint8_t { Given, Derived, Missing };

struct Justification {
  JustificationKind kind = JustificationKind::Given;
  std::optional<RuleId> rule;
  std::vector<std::string> parents;

  static Justification given() { return {}; }
  static Justification derived(RuleId rule, std::vector<std::string> parents) {
    return {JustificationKind::Derived, rule, std::move(parents)};
  }
  static Justification missing() { return {JustificationKind::Missing, std::nullopt, {}}; }

  bool operator==(const Justification&) const = default;
};

struct ProofNode {
  std::string id;
  Formula formula;
  Justification justification;

  bool is_given() const { return justification.kind == JustificationKind::Given; }
  bool is_derived() const { return justification.kind == JustificationKind::Derived; }
};

/// Justification DAG. Edges run from each derived node to its parents.
struct ProofGraph {
  std::vector<ProofNode> nodes;
  std::string conclusion_id;

  const ProofNode* find(const std::string& id) const;
  ProofNode* find(const std::string& id);
  const ProofNode& at(const std::string& id) const;
  ProofNode& at(const std::string& id);
  const ProofNode& conclusion() const { return at(conclusion_id); }
  std::size_t derived_count() const;
};

struct ValidationResult {
  bool valid = true;
  std::optional<std::string> first_error;
  std::string reason;
};

/// Checks structure (throws Error{DanglingParent} / Error{CycleDetected}),
/// then every derived node's rule application in node order. A node with a
/// missing justification is invalid. When `expected_conclusion` is given the
/// conclusion node must carry exactly that formula.
ValidationResult validate_proof(const ProofGraph& graph,
                                const std::optional<Formula>& expected_conclusion = std::nullopt);

/// A curriculum item, identified as "level.index".
struct Problem {
  std::string id;
  int level = 0;
  int index = 0;
  std::vector<Formula> givens;
  Formula conclusion;
  ProofGraph reference_solution;
  std::set<RuleId> required_rules;
  int difficulty = 1;

  /// Length of the shortest known solution, in derived steps.
  std::size_t reference_steps() const { return reference_solution.derived_count(); }
};

/// Rules used by the derived nodes of a graph.
std::set<RuleId> rules_used(const ProofGraph& graph);

/// Empty when the problem satisfies its invariants, else a description of the
/// first violation.
std::optional<std::string> check_problem(const Problem& problem);

}  // namespace scaffold::logic
