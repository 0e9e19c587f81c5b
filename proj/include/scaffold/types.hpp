#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace scaffold {

/// Problem representation served to a student. Numeric order is the action
/// order of the value network and the tie-break order of greedy selection.
enum class ProblemType : std::uint8_t { PS = 0, Guided = 1, Buggy = 2 };

inline constexpr std::array<ProblemType, 3> kProblemTypes = {ProblemType::PS, ProblemType::Guided,
                                                             ProblemType::Buggy};

inline std::string_view to_string(ProblemType t) {
  switch (t) {
    case ProblemType::PS: return "PS";
    case ProblemType::Guided: return "Guided";
    case ProblemType::Buggy: return "Buggy";
  }
  return "?";
}

inline std::optional<ProblemType> problem_type_from_string(std::string_view s) {
  for (ProblemType t : kProblemTypes) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

inline std::size_t index_of(ProblemType t) { return static_cast<std::size_t>(t); }

}  // namespace scaffold
