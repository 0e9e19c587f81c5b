#include "scaffold/sim/curriculum.hpp"

#include <set>

#include "scaffold/error.hpp"

namespace scaffold::sim {

Curriculum::Curriculum(const logic::ProblemBank& bank) : bank_(&bank) {
  auto level = [&](int n, std::size_t expected) {
    auto problems = bank.level(n);
    if (problems.size() != expected) {
      throw Error(Errc::BankFormat, "level " + std::to_string(n) + " has " + std::to_string(problems.size()) +
                                        " problems, expected " + std::to_string(expected));
    }
    return problems;
  };
  const auto intro = level(1, 4);
  for (int i = 0; i < 4; ++i) {
    slots_.push_back({1, i + 1, i < 2 ? Stage::Intro : Stage::Pretest, intro[static_cast<std::size_t>(i)]->id});
  }
  int previous_difficulty = 0;
  for (int l = kFirstTrainingLevel; l <= kLastTrainingLevel; ++l) {
    const auto problems = level(l, 4);
    for (int i = 0; i < 4; ++i) {
      const auto* p = problems[static_cast<std::size_t>(i)];
      if (p->difficulty <= previous_difficulty) {
        throw Error(Errc::BankFormat, "training level " + std::to_string(l) + " is not harder than the previous level");
      }
      slots_.push_back({l, i + 1, i < kAdaptiveSlots ? Stage::Training : Stage::LevelEnd, p->id});
    }
    previous_difficulty = problems.front()->difficulty;
    for (const auto* p : problems) previous_difficulty = std::max(previous_difficulty, p->difficulty);
  }
  const auto post = level(kLevels, 6);
  for (int i = 0; i < 6; ++i) slots_.push_back({kLevels, i + 1, Stage::Posttest, post[static_cast<std::size_t>(i)]->id});
}

std::vector<logic::RuleId> Curriculum::introduced_rules(int level) const {
  std::set<logic::RuleId> seen;
  for (const auto& s : slots_) {
    if (s.level > level) continue;
    for (auto r : logic::rules_used(problem(s).reference_solution)) seen.insert(r);
  }
  return {seen.begin(), seen.end()};
}

}  // namespace scaffold::sim
