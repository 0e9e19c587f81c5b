#include "scaffold/logic/rules.hpp"

#include <cstdint>
#include <vector>

#include "scaffold/error.hpp"

namespace scaffold::logic {

namespace {

constexpr std::array<Rule, kRuleCount> kRules = {{
    {RuleId::MP, 2, "MP", "Modus Ponens", "an implication-elimination rule"},
    {RuleId::MT, 2, "MT", "Modus Tollens", "a contrapositive rule"},
    {RuleId::DS, 2, "DS", "Disjunctive Syllogism", "a disjunction-elimination rule"},
    {RuleId::HS, 2, "HS", "Hypothetical Syllogism", "an implication-chaining rule"},
    {RuleId::Simp, 1, "Simp", "Simplification", "a conjunction-elimination rule"},
    {RuleId::Conj, 2, "Conj", "Conjunction", "a conjunction-introduction rule"},
    {RuleId::Add, 1, "Add", "Addition", "a disjunction-introduction rule"},
    {RuleId::Res, 2, "Res", "Resolution", "a resolution rule"},
}};

bool is_negation_of(const Formula& neg, const Formula& f) {
  return neg.is(Connective::Not) && neg.child() == f;
}

bool disjunction_of(const Formula& f, const Formula& a, const Formula& b) {
  return f.is(Connective::Or) &&
         ((f.left() == a && f.right() == b) || (f.left() == b && f.right() == a));
}

// Ordered two-premise schemas; the caller tries both orders.
bool check_ordered(RuleId rule, const Formula& p, const Formula& q, const Formula& d) {
  switch (rule) {
    case RuleId::MP:
      // A -> B, A |- B
      return p.is(Connective::Implies) && q == p.left() && d == p.right();
    case RuleId::MT:
      // A -> B, ~B |- ~A
      return p.is(Connective::Implies) && is_negation_of(q, p.right()) && is_negation_of(d, p.left());
    case RuleId::DS:
      // A | B, ~A |- B   and   A | B, ~B |- A
      return p.is(Connective::Or) &&
             ((is_negation_of(q, p.left()) && d == p.right()) ||
              (is_negation_of(q, p.right()) && d == p.left()));
    case RuleId::HS:
      // A -> B, B -> C |- A -> C
      return p.is(Connective::Implies) && q.is(Connective::Implies) && p.right() == q.left() &&
             d.is(Connective::Implies) && d.left() == p.left() && d.right() == q.right();
    case RuleId::Conj:
      // A, B |- A & B
      return d.is(Connective::And) && d.left() == p && d.right() == q;
    case RuleId::Res: {
      // A | B, ~A | C |- B | C
      if (!p.is(Connective::Or) || !q.is(Connective::Or)) return false;
      const Formula* ps[2] = {&p.left(), &p.right()};
      const Formula* qs[2] = {&q.left(), &q.right()};
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
          if (is_negation_of(*qs[j], *ps[i]) &&
              disjunction_of(d, *ps[1 - i], *qs[1 - j])) {
            return true;
          }
        }
      }
      return false;
    }
    default: return false;
  }
}

void collect_all(std::span<const Formula> fs, std::set<char>& out) {
  for (const auto& f : fs) {
    auto v = variables(f);
    out.insert(v.begin(), v.end());
  }
}

}  // namespace

const Rule& rule_info(RuleId id) { return kRules[index_of(id)]; }

std::string_view to_string(RuleId id) { return rule_info(id).code; }

std::optional<RuleId> rule_from_string(std::string_view code) {
  for (const auto& r : kRules) {
    if (r.code == code) return r.id;
  }
  return std::nullopt;
}

bool check_rule_application(RuleId rule, std::span<const Formula> premises,
                            const Formula& derived) {
  const Rule& info = rule_info(rule);
  if (static_cast<int>(premises.size()) != info.arity) {
    throw Error(Errc::ArityMismatch, std::string(info.code) + " takes " +
                                         std::to_string(info.arity) + " premise(s), got " +
                                         std::to_string(premises.size()));
  }
  if (info.arity == 1) {
    const Formula& p = premises[0];
    if (rule == RuleId::Simp) {
      // A & B |- A   and   A & B |- B
      return p.is(Connective::And) && (derived == p.left() || derived == p.right());
    }
    // Add: A |- A | B   and   A |- B | A
    return derived.is(Connective::Or) && (derived.left() == p || derived.right() == p);
  }
  return check_ordered(rule, premises[0], premises[1], derived) ||
         check_ordered(rule, premises[1], premises[0], derived);
}

bool entails(std::span<const Formula> premises, const Formula& conclusion) {
  std::set<char> vars;
  collect_all(premises, vars);
  collect_all(std::span<const Formula>(&conclusion, 1), vars);
  if (vars.size() > kMaxEntailmentVariables) {
    throw Error(Errc::TooManyVariables,
                std::to_string(vars.size()) + " distinct variables exceeds the limit of " +
                    std::to_string(kMaxEntailmentVariables));
  }
  const std::vector<char> letters(vars.begin(), vars.end());
  const std::uint32_t rows = 1u << letters.size();
  Assignment a{};
  for (std::uint32_t bits = 0; bits < rows; ++bits) {
    for (std::size_t i = 0; i < letters.size(); ++i) {
      a[static_cast<std::size_t>(letters[i] - 'A')] = (bits >> i) & 1u;
    }
    bool all = true;
    for (const auto& p : premises) {
      if (!evaluate(p, a)) {
        all = false;
        break;
      }
    }
    if (all && !evaluate(conclusion, a)) return false;
  }
  return true;
}

}  // namespace scaffold::logic
