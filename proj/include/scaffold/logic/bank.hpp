#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scaffold/logic/proof.hpp"

namespace scaffold::logic {

class ProblemBank {
 public:
  ProblemBank() = default;
  explicit ProblemBank(std::vector<Problem> problems);

  const std::vector<Problem>& problems() const { return problems_; }
  const Problem* find(const std::string& id) const;
  const Problem& at(const std::string& id) const;
  std::vector<const Problem*> level(int level) const;
  std::size_t size() const { return problems_.size(); }

 private:
  std::vector<Problem> problems_;
};

/// Loads a bank from a directory of per-level JSON documents (`*.json`,
/// loaded in filename order) or from a single document. Throws
/// Error{BankFormat} or SyntaxError on malformed content; does not check
/// the problems' invariants.
ProblemBank load_bank(const std::filesystem::path& path);

struct BankIssue {
  std::string problem_id;
  std::string message;
};

/// Invariant check of every problem, in bank order.
std::vector<BankIssue> validate_bank(const ProblemBank& bank);

}  // namespace scaffold::logic
