#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>

namespace scaffold::logic {

enum class Connective : std::uint8_t { Variable, Not, And, Or, Implies, Iff };

/// Immutable propositional formula. Copies share structure; equality is
/// structural.
class Formula {
 public:
  static Formula variable(char name);
  static Formula negation(Formula child);
  static Formula conjunction(Formula left, Formula right);
  static Formula disjunction(Formula left, Formula right);
  static Formula implication(Formula left, Formula right);
  static Formula biconditional(Formula left, Formula right);
  static Formula binary(Connective op, Formula left, Formula right);

  Connective kind() const noexcept;
  bool is(Connective op) const noexcept { return kind() == op; }

  // Precondition: is(Variable).
  char name() const;
  // Precondition: is(Not).
  const Formula& child() const;
  // Precondition: binary connective.
  const Formula& left() const;
  const Formula& right() const;

  std::size_t depth() const noexcept;
  std::size_t size() const noexcept;

  friend bool operator==(const Formula& a, const Formula& b) noexcept;
  friend bool operator!=(const Formula& a, const Formula& b) noexcept { return !(a == b); }

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

bool is_binary(Connective op) noexcept;

/// Parses the ASCII grammar: `~` `&` `|` `->` `<->`, parentheses and single
/// upper-case letters. Binding from tightest: ~ & | -> <->. `&` and `|`
/// associate left, `->` and `<->` associate right.
/// Throws SyntaxError (with byte offset) or Error{EmptyInput}.
Formula parse_formula(std::string_view text);

/// Renders with the fewest parentheses that re-parse to the same tree.
std::string render(const Formula& f);

/// Renders every binary sub-term in parentheses.
std::string render_full(const Formula& f);

std::set<char> variables(const Formula& f);

/// Truth assignment indexed by letter ('A' -> 0).
using Assignment = std::array<bool, 26>;

bool evaluate(const Formula& f, const Assignment& assignment);

}  // namespace scaffold::logic
