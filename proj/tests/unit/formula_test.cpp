#include "scaffold/logic/formula.hpp"

#include "test_support.hpp"

namespace scaffold::logic {
namespace {

using testing::F;

TEST(ParseFormula, ConjunctionWithNegation) {
  const Formula f = F("G & ~H");
  ASSERT_TRUE(f.is(Connective::And));
  EXPECT_EQ(f.left(), Formula::variable('G'));
  ASSERT_TRUE(f.right().is(Connective::Not));
  EXPECT_EQ(f.right().child(), Formula::variable('H'));
}

TEST(ParseFormula, Atom) {
  const Formula f = F("A");
  ASSERT_TRUE(f.is(Connective::Variable));
  EXPECT_EQ(f.name(), 'A');
  EXPECT_EQ(f.depth(), 1u);
}

TEST(ParseFormula, PrecedenceAgainstFullyParenthesizedRendering) {
  const Formula f = F("~(A | B) -> C & D");
  const Formula expected = Formula::implication(
      Formula::negation(Formula::disjunction(Formula::variable('A'), Formula::variable('B'))),
      Formula::conjunction(Formula::variable('C'), Formula::variable('D')));
  EXPECT_EQ(f, expected);
  EXPECT_EQ(render_full(f), "~(A | B) -> (C & D)");
  EXPECT_EQ(F(render_full(f).c_str()), expected);
}

TEST(ParseFormula, Associativity) {
  EXPECT_EQ(F("A -> B -> C"), F("A -> (B -> C)"));
  EXPECT_NE(F("A -> B -> C"), F("(A -> B) -> C"));
  EXPECT_EQ(F("A & B & C"), F("(A & B) & C"));
  EXPECT_EQ(F("A | B | C"), F("(A | B) | C"));
  EXPECT_EQ(F("A <-> B <-> C"), F("A <-> (B <-> C)"));
  EXPECT_EQ(F("A | B & C"), F("A | (B & C)"));
  EXPECT_EQ(F("A -> B <-> C"), F("(A -> B) <-> C"));
  EXPECT_EQ(F("~~A"), Formula::negation(Formula::negation(Formula::variable('A'))));
}

TEST(ParseFormula, Errors) {
  EXPECT_ERRC(parse_formula(""), Errc::EmptyInput);
  EXPECT_ERRC(parse_formula("   \t"), Errc::EmptyInput);

  auto offset_of = [](const char* text) -> std::size_t {
    try {
      parse_formula(text);
    } catch (const SyntaxError& e) {
      return e.offset();
    }
    return std::string::npos;
  };
  EXPECT_EQ(offset_of("A &"), 3u);
  EXPECT_EQ(offset_of("A $ B"), 2u);
  EXPECT_EQ(offset_of("(A | B"), 6u);
  EXPECT_EQ(offset_of("a"), 0u);
  EXPECT_EQ(offset_of("A B"), 2u);
  EXPECT_EQ(offset_of("A - B"), 2u);
  EXPECT_EQ(offset_of("A <- B"), 2u);
  EXPECT_EQ(offset_of(")"), 0u);
}

TEST(Render, MinimalParentheses) {
  EXPECT_EQ(render(F("((A & B))")), "A & B");
  EXPECT_EQ(render(F("(A -> B) -> C")), "(A -> B) -> C");
  EXPECT_EQ(render(F("A -> (B -> C)")), "A -> B -> C");
  EXPECT_EQ(render(F("A & (B & C)")), "A & (B & C)");
  EXPECT_EQ(render(F("~(A & B) | C")), "~(A & B) | C");
}

TEST(Render, RoundTripOnRandomFormulas) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Formula f = testing::random_formula(rng, 6, 5);
    EXPECT_EQ(parse_formula(render(f)), f) << render(f);
    EXPECT_EQ(parse_formula(render_full(f)), f) << render_full(f);
  }
}

TEST(Render, FixedPointOnBank) {
  for (const auto& p : testing::bank().problems()) {
    for (const auto& n : p.reference_solution.nodes) {
      const std::string once = render(n.formula);
      EXPECT_EQ(render(parse_formula(once)), once) << p.id;
    }
  }
}

TEST(Formula, StructuralEquality) {
  EXPECT_EQ(F("A & B"), Formula::conjunction(Formula::variable('A'), Formula::variable('B')));
  EXPECT_NE(F("A & B"), F("B & A"));
  EXPECT_NE(F("A"), F("~A"));
  EXPECT_ERRC(Formula::variable('a'), Errc::InvalidArgument);
}

TEST(Formula, Evaluate) {
  Assignment a{};
  a['A' - 'A'] = true;
  EXPECT_TRUE(evaluate(F("A | B"), a));
  EXPECT_FALSE(evaluate(F("A & B"), a));
  EXPECT_FALSE(evaluate(F("A -> B"), a));
  EXPECT_TRUE(evaluate(F("B -> A"), a));
  EXPECT_FALSE(evaluate(F("A <-> B"), a));
  EXPECT_EQ(variables(F("(A -> C) & ~A")), (std::set<char>{'A', 'C'}));
}

}  // namespace
}  // namespace scaffold::logic
