#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "scaffold/logic/bank.hpp"
#include "scaffold/logic/proof.hpp"

namespace scaffold::logic {

/// Partial solution: every statement is present, some justifications are
/// stripped and carry a hint instead.
struct GuidedVariant {
  std::string base_problem_id;
  ProofGraph nodes;
  std::vector<std::string> missing_justifications;  // in node order
  std::map<std::string, std::string> hints;
};

/// Strips ceil(removal_fraction * derived) justifications, chosen by `seed`.
/// Throws Error{NoDerivedNodes} for problems with fewer than two derived nodes.
GuidedVariant make_guided(const Problem& problem, double removal_fraction, std::uint64_t seed);

/// Restores the reference justification of every stripped node.
ProofGraph complete_guided(const GuidedVariant& variant, const Problem& problem);

enum class BugKind : std::uint8_t { Statement, Rule };

using BugValue = std::variant<Formula, RuleId>;

std::string to_string(const BugValue& value);

struct Bug {
  std::string node_id;
  BugKind kind;
  BugValue corrupted;
  BugValue correct;
};

/// Complete solution with inserted errors. Givens and the conclusion are
/// always correct.
struct BuggyVariant {
  std::string base_problem_id;
  ProofGraph nodes;
  std::vector<Bug> bugs;
};

/// Inserts `bug_count` bugs on distinct derived, non-conclusion nodes. Every
/// bug alone makes the proof fail validation.
/// Throws Error{BugBudgetExceeded} when bug_count is 0 or exceeds the
/// number of eligible nodes.
BuggyVariant make_buggy(const Problem& problem, int bug_count, std::uint64_t seed);

/// Bugs whose node still carries the corrupted value.
std::size_t remaining_bug_count(const BuggyVariant& variant);

/// Applies the correct value of bug `index`.
void fix_bug(BuggyVariant& variant, std::size_t index);

/// Graph with every bug's correct value applied.
ProofGraph fix_all(const BuggyVariant& variant);

/// For every problem: the reference solution validates, a fully stripped
/// Guided variant completes to a valid proof, and a Buggy variant (up to
/// `bug_count` bugs) is invalid until fix_all. Checks `seeds` variants each.
std::vector<BankIssue> check_round_trips(const ProblemBank& bank, int bug_count, int seeds);

}  // namespace scaffold::logic
