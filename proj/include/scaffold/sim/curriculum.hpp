#pragma once

#include <string>
#include <vector>

#include "scaffold/drl/features.hpp"
#include "scaffold/logic/bank.hpp"

namespace scaffold::sim {

using drl::Stage;

struct CurriculumSlot {
  int level = 1;
  int slot = 1;  // 1-based within the level
  Stage stage = Stage::Training;
  std::string problem_id;
  bool adaptive() const { return stage == Stage::Training; }
};

inline constexpr int kLevels = 7;
inline constexpr int kFirstTrainingLevel = 2;
inline constexpr int kLastTrainingLevel = 6;
inline constexpr int kAdaptiveSlots = 3;

/// Level 1: two passive worked examples then two pretest problems; levels
/// 2-6: three adaptive slots and a level-end test; level 7: six posttest
/// problems.
class Curriculum {
 public:
  /// Throws Error{BankFormat} if the bank lacks the expected problems or the
  /// training levels are not strictly increasing in difficulty.
  explicit Curriculum(const logic::ProblemBank& bank);

  const std::vector<CurriculumSlot>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  const logic::ProblemBank& bank() const { return *bank_; }
  const logic::Problem& problem(const CurriculumSlot& slot) const { return bank_->at(slot.problem_id); }

  /// Rules used by reference solutions of levels 1..level, in rule order.
  std::vector<logic::RuleId> introduced_rules(int level) const;

 private:
  const logic::ProblemBank* bank_;
  std::vector<CurriculumSlot> slots_;
};

}  // namespace scaffold::sim
