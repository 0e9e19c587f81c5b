#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "scaffold/logic/formula.hpp"

namespace scaffold::logic {

enum class RuleId : std::uint8_t { MP, MT, DS, HS, Simp, Conj, Add, Res };

inline constexpr std::size_t kRuleCount = 8;
inline constexpr std::array<RuleId, kRuleCount> kAllRules = {
    RuleId::MP, RuleId::MT, RuleId::DS, RuleId::HS,
    RuleId::Simp, RuleId::Conj, RuleId::Add, RuleId::Res};

struct Rule {
  RuleId id;
  int arity;
  std::string_view code;          // "MP"
  std::string_view display_name;  // "Modus Ponens"
  std::string_view hint_class;    // used in generated hints
};

const Rule& rule_info(RuleId id);
std::string_view to_string(RuleId id);
std::optional<RuleId> rule_from_string(std::string_view code);
inline std::size_t index_of(RuleId id) { return static_cast<std::size_t>(id); }

/// Schema check: does `derived` follow from `premises` by one application of
/// `rule`? Arity-2 rules accept premises in either order.
/// Throws Error{ArityMismatch} when premises.size() != arity.
bool check_rule_application(RuleId rule, std::span<const Formula> premises,
                            const Formula& derived);

/// Semantic entailment by exhaustive truth-table enumeration.
/// Throws Error{TooManyVariables} above 20 distinct variables.
bool entails(std::span<const Formula> premises, const Formula& conclusion);

inline constexpr std::size_t kMaxEntailmentVariables = 20;

}  // namespace scaffold::logic
