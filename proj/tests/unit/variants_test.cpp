#include "scaffold/logic/variants.hpp"

#include "test_support.hpp"

namespace scaffold::logic {
namespace {

using testing::F;

TEST(MakeGuided, FullRemovalKeepsEveryStatement) {
  const Problem& p = testing::bank().at("2.1");  // four derived nodes
  ASSERT_EQ(p.reference_steps(), 4u);
  const GuidedVariant v = make_guided(p, 1.0, 1);
  EXPECT_EQ(v.missing_justifications.size(), 4u);
  ASSERT_EQ(v.nodes.nodes.size(), p.reference_solution.nodes.size());
  for (std::size_t i = 0; i < v.nodes.nodes.size(); ++i) {
    EXPECT_EQ(v.nodes.nodes[i].formula, p.reference_solution.nodes[i].formula);
  }
}

TEST(MakeGuided, HalfRemoval) {
  const Problem& p = testing::bank().at("2.1");
  EXPECT_EQ(make_guided(p, 0.5, 3).missing_justifications.size(), 2u);
  EXPECT_EQ(make_guided(p, 0.3, 3).missing_justifications.size(), 2u);
  EXPECT_EQ(make_guided(p, 0.25, 3).missing_justifications.size(), 1u);
}

TEST(MakeGuided, HintsAndCompletion) {
  for (const auto& p : testing::bank().problems()) {
    for (double fraction : {0.25, 0.5, 1.0}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        const GuidedVariant v = make_guided(p, fraction, seed);
        EXPECT_FALSE(validate_proof(v.nodes, p.conclusion).valid) << p.id;
        for (const auto& id : v.missing_justifications) {
          ASSERT_TRUE(v.hints.contains(id)) << p.id << " " << id;
          EXPECT_NE(v.hints.at(id).find("Apply "), std::string::npos);
          EXPECT_EQ(v.nodes.at(id).justification.kind, JustificationKind::Missing);
          for (const auto& parent : p.reference_solution.at(id).justification.parents) {
            EXPECT_NE(v.hints.at(id).find(parent), std::string::npos);
          }
        }
        EXPECT_TRUE(validate_proof(complete_guided(v, p), p.conclusion).valid) << p.id;
      }
    }
  }
}

TEST(MakeGuided, DeterministicPerSeed) {
  const Problem& p = testing::bank().at("6.3");
  EXPECT_EQ(make_guided(p, 0.5, 42).missing_justifications, make_guided(p, 0.5, 42).missing_justifications);
}

TEST(MakeGuided, Errors) {
  Problem p = testing::bank().at("2.1");
  auto& ns = p.reference_solution.nodes;  // keep the givens plus one derived node
  ns.erase(ns.begin() + 5, ns.end());
  p.reference_solution.conclusion_id = "5";
  EXPECT_ERRC(make_guided(p, 1.0, 1), Errc::NoDerivedNodes);
  EXPECT_ERRC(make_guided(testing::bank().at("2.1"), 0.0, 1), Errc::InvalidArgument);
  EXPECT_ERRC(make_guided(testing::bank().at("2.1"), 1.5, 1), Errc::InvalidArgument);
}

TEST(Buggy, RuleBugConjForSimpIsFlaggedAtNode) {
  const Problem& p = testing::bank().at("1.3");
  ProofGraph g = p.reference_solution;
  ProofNode& n = g.at("4");  // ~H by Simp from G & ~H
  ASSERT_EQ(n.justification.rule, RuleId::Simp);
  n.justification.rule = RuleId::Conj;
  const auto r = validate_proof(g, p.conclusion);
  EXPECT_FALSE(r.valid);
  EXPECT_EQ(r.first_error, "4");
}

TEST(MakeBuggy, BudgetErrors) {
  const Problem& p = testing::bank().at("2.1");
  EXPECT_ERRC(make_buggy(p, 0, 1), Errc::BugBudgetExceeded);
  EXPECT_ERRC(make_buggy(p, -1, 1), Errc::BugBudgetExceeded);
  EXPECT_ERRC(make_buggy(p, 4, 1), Errc::BugBudgetExceeded);  // 3 eligible nodes
  EXPECT_NO_THROW(make_buggy(p, 3, 1));
}

TEST(MakeBuggy, FixAllRoundTripOverBank) {
  int statement_bugs = 0;
  int rule_bugs = 0;
  for (const auto& p : testing::bank().problems()) {
    for (int count = 1; count <= 3; ++count) {
      for (std::uint64_t seed = 0; seed < 8; ++seed) {
        BuggyVariant v = make_buggy(p, count, seed);
        ASSERT_EQ(v.bugs.size(), static_cast<std::size_t>(count));
        EXPECT_FALSE(validate_proof(v.nodes, p.conclusion).valid) << p.id;
        EXPECT_EQ(v.nodes.conclusion().formula, p.conclusion);
        for (const Bug& b : v.bugs) {
          const ProofNode& n = v.nodes.at(b.node_id);
          EXPECT_FALSE(n.is_given()) << p.id;
          EXPECT_NE(b.node_id, p.reference_solution.conclusion_id);
          EXPECT_NE(to_string(b.corrupted), to_string(b.correct));
          (b.kind == BugKind::Statement ? statement_bugs : rule_bugs)++;
        }
        EXPECT_TRUE(validate_proof(fix_all(v), p.conclusion).valid) << p.id;

        // Fix one at a time; the remaining count is visible throughout.
        for (std::size_t i = 0; i < v.bugs.size(); ++i) {
          EXPECT_EQ(remaining_bug_count(v), v.bugs.size() - i);
          fix_bug(v, i);
        }
        EXPECT_EQ(remaining_bug_count(v), 0u);
        EXPECT_TRUE(validate_proof(v.nodes, p.conclusion).valid) << p.id;
      }
    }
  }
  EXPECT_GT(statement_bugs, 100);
  EXPECT_GT(rule_bugs, 100);
}

TEST(MakeBuggy, EachBugAloneIsDetectable) {
  for (const auto& p : testing::bank().problems()) {
    const BuggyVariant v = make_buggy(p, 3, 5);
    for (const Bug& b : v.bugs) {
      BuggyVariant single{p.id, p.reference_solution, {b}};
      ProofNode& n = single.nodes.at(b.node_id);
      if (b.kind == BugKind::Statement) {
        n.formula = std::get<Formula>(b.corrupted);
      } else {
        n.justification.rule = std::get<RuleId>(b.corrupted);
      }
      EXPECT_FALSE(validate_proof(single.nodes, p.conclusion).valid) << p.id << " " << b.node_id;
      EXPECT_EQ(remaining_bug_count(single), 1u);
    }
  }
}

TEST(MakeBuggy, DeterministicPerSeed) {
  const Problem& p = testing::bank().at("7.6");
  const auto a = make_buggy(p, 3, 77);
  const auto b = make_buggy(p, 3, 77);
  ASSERT_EQ(a.bugs.size(), b.bugs.size());
  for (std::size_t i = 0; i < a.bugs.size(); ++i) {
    EXPECT_EQ(a.bugs[i].node_id, b.bugs[i].node_id);
    EXPECT_EQ(to_string(a.bugs[i].corrupted), to_string(b.bugs[i].corrupted));
  }
}

TEST(CheckRoundTrips, WholeBankIsClean) {
  const auto issues = check_round_trips(testing::bank(), 2, 3);
  for (const auto& i : issues) ADD_FAILURE() << i.problem_id << ": " << i.message;
}

}  // namespace
}  // namespace scaffold::logic
