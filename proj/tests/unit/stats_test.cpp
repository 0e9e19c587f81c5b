#include "scaffold/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "test_support.hpp"

namespace scaffold::stats {
namespace {

using V = std::vector<double>;

// Independent oracle: U by pairwise counting, p by bitmask enumeration.
double pairwise_u(const V& x, const V& y) {
  double u = 0.0;
  for (double a : x) {
    for (double b : y) u += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return u;
}

double bitmask_exact_p(const V& x, const V& y) {
  V all = x;
  all.insert(all.end(), y.begin(), y.end());
  const int total = static_cast<int>(all.size());
  const int n = static_cast<int>(x.size());
  const double center = x.size() * y.size() / 2.0;
  const double observed = std::abs(pairwise_u(x, y) - center);
  int hits = 0, count = 0;
  for (unsigned mask = 0; mask < (1u << total); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    V a, b;
    for (int i = 0; i < total; ++i) ((mask >> i) & 1u ? a : b).push_back(all[i]);
    ++count;
    if (std::abs(pairwise_u(a, b) - center) >= observed - 1e-9) ++hits;
  }
  return static_cast<double>(hits) / count;
}

TEST(MannWhitney, SeparatedPairIsOneThird) {
  const auto r = mann_whitney(V{1, 2}, V{3, 4});
  EXPECT_DOUBLE_EQ(r.u, 0.0);
  EXPECT_TRUE(r.exact);
  EXPECT_NEAR(r.p, 2.0 / 6.0, 1e-12);
}

TEST(MannWhitney, IdenticalSamplesSitAtCenter) {
  const V x{3, 1, 4, 1, 5, 9, 2, 6};
  const auto r = mann_whitney(x, x);
  EXPECT_DOUBLE_EQ(r.u, x.size() * x.size() / 2.0);
  EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(MannWhitney, ShiftedSequencesAreSignificant) {
  V x, y;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(i);
    y.push_back(i + 100);
  }
  const auto r = mann_whitney(x, y);
  EXPECT_FALSE(r.exact);
  EXPECT_LT(r.p, 1e-6);
}

TEST(MannWhitney, ExactMatchesBitmaskOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> val(0, 6), size(1, 6);
  for (int t = 0; t < 300; ++t) {
    V x(size(rng)), y(size(rng));
    for (auto& v : x) v = val(rng);
    for (auto& v : y) v = val(rng);
    EXPECT_NEAR(mann_whitney_exact_p(x, y), bitmask_exact_p(x, y), 1e-12);
    EXPECT_NEAR(mann_whitney(x, y).u, pairwise_u(x, y), 1e-12);
  }
}

TEST(MannWhitney, NormalApproximationTracksExactAtTen) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 40; ++t) {
    V pool(20);
    std::iota(pool.begin(), pool.end(), 1.0);
    std::shuffle(pool.begin(), pool.end(), rng);
    const V x(pool.begin(), pool.begin() + 10), y(pool.begin() + 10, pool.end());
    EXPECT_LE(std::abs(mann_whitney_exact_p(x, y) - mann_whitney_normal_p(x, y)), 0.02);
  }
}

TEST(MannWhitney, Errors) {
  EXPECT_ERRC(mann_whitney(V{}, V{1}), Errc::EmptySample);
  EXPECT_ERRC(mann_whitney(V{1}, V{}), Errc::EmptySample);
}

TEST(KruskalWallis, Examples) {
  const std::vector<V> sep{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  const auto r = kruskal_wallis(sep);
  EXPECT_NEAR(r.h, 7.2, 1e-9);
  EXPECT_EQ(r.df, 2);
  EXPECT_NEAR(r.p, std::exp(-3.6), 1e-9);  // chi-square sf with 2 df is exp(-x/2)

  const std::vector<V> same{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  EXPECT_NEAR(kruskal_wallis(same).h, 0.0, 1e-12);
  const std::vector<V> flat{{4, 4}, {4}};
  EXPECT_DOUBLE_EQ(kruskal_wallis(flat).h, 0.0);
  EXPECT_DOUBLE_EQ(kruskal_wallis(flat).p, 1.0);
}

TEST(KruskalWallis, TwoGroupsMatchSquaredZ) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    V pool(25);
    std::iota(pool.begin(), pool.end(), 0.5);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t cut = 5 + rng() % 15;
    const V x(pool.begin(), pool.begin() + cut), y(pool.begin() + cut, pool.end());
    const std::vector<V> groups{x, y};
    const double z = mann_whitney(x, y).z;
    EXPECT_NEAR(kruskal_wallis(groups).h, z * z, 1e-6);
  }
}

TEST(KruskalWallis, Errors) {
  const std::vector<V> one{{1, 2}};
  EXPECT_ERRC(kruskal_wallis(one), Errc::TooFewGroups);
  const std::vector<V> hole{{1, 2}, {}};
  EXPECT_ERRC(kruskal_wallis(hole), Errc::EmptySample);
}

TEST(ChiSquare, TypeDistributionCounts) {
  const auto r = chi_square({{241, 203, 164}, {277, 201, 161}});
  EXPECT_EQ(r.df, 2);
  EXPECT_NEAR(r.chi2, 1.77, 0.15);
  EXPECT_DOUBLE_EQ(bonferroni(r.p, 3), 1.0);
}

TEST(ChiSquare, Examples) {
  EXPECT_NEAR(chi_square({{5, 7, 9}, {5, 7, 9}}).chi2, 0.0, 1e-12);
  // Expected 12, 18, 28, 42 for margins (30, 70) x (40, 60); every cell is
  // 2 off, 1.5 after the continuity correction.
  const double hand = 2.25 * (1.0 / 12 + 1.0 / 18 + 1.0 / 28 + 1.0 / 42);
  const auto r = chi_square({{10, 20}, {30, 40}});
  EXPECT_NEAR(r.chi2, hand, 1e-12);
  EXPECT_NEAR(r.chi2, 0.4464, 5e-5);
  EXPECT_EQ(r.df, 1);
}

TEST(ChiSquare, PermutationInvariance) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> count(1, 60);
  for (int t = 0; t < 200; ++t) {
    std::vector<V> table(3, V(3));
    for (auto& row : table) {
      for (auto& c : row) c = count(rng);
    }
    const double base = chi_square(table).chi2;
    auto rows = table;
    std::shuffle(rows.begin(), rows.end(), rng);
    EXPECT_NEAR(chi_square(rows).chi2, base, 1e-9);
    std::vector<std::size_t> perm{0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    auto cols = table;
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) cols[i][j] = table[i][perm[j]];
    }
    EXPECT_NEAR(chi_square(cols).chi2, base, 1e-9);
  }
}

TEST(ChiSquare, Degenerate) {
  EXPECT_ERRC(chi_square({{0, 0}, {1, 2}}), Errc::DegenerateTable);
  EXPECT_ERRC(chi_square({{0, 1}, {0, 2}}), Errc::DegenerateTable);
  EXPECT_ERRC(chi_square({{1, 2}}), Errc::DegenerateTable);
  EXPECT_ERRC(chi_square({{1, 2}, {1}}), Errc::DegenerateTable);
}

TEST(Bonferroni, Capping) {
  EXPECT_DOUBLE_EQ(bonferroni(0.01, 3), 0.03);
  EXPECT_DOUBLE_EQ(bonferroni(0.5, 3), 1.0);
  const V ps{0.01, 0.2, 0.6};
  EXPECT_EQ(bonferroni(ps, 3), (V{0.03, 0.6000000000000001, 1.0}));
  EXPECT_ERRC(bonferroni(ps, 2), Errc::InvalidArgument);
}

TEST(EffectSizeA, Examples) {
  EXPECT_DOUBLE_EQ(effect_size_a(V{1, 2, 3}, V{0}), 1.0);
  EXPECT_DOUBLE_EQ(effect_size_a(V{1, 2}, V{1, 2}), 0.5);
  EXPECT_ERRC(effect_size_a(V{}, V{1}), Errc::EmptySample);
}

TEST(EffectSizeA, ComplementAndMonotoneInvariance) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> size(1, 15), val(0, 20);
  for (int t = 0; t < 1000; ++t) {
    V x(size(rng)), y(size(rng));
    for (auto& v : x) v = val(rng);
    for (auto& v : y) v = val(rng);
    EXPECT_NEAR(effect_size_a(x, y) + effect_size_a(y, x), 1.0, 1e-12);
    V tx = x, ty = y;
    for (auto& v : tx) v = std::exp(v / 3.0) - 7.0;
    for (auto& v : ty) v = std::exp(v / 3.0) - 7.0;
    EXPECT_DOUBLE_EQ(effect_size_a(tx, ty), effect_size_a(x, y));
  }
}

TEST(EffectSizeA, BootstrapIntervalIsSeededAndContainsEstimate) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n0(60, 10), n1(65, 10);
  for (int t = 0; t < 10; ++t) {
    V x(12), y(9);
    for (auto& v : x) v = n1(rng);
    for (auto& v : y) v = n0(rng);
    const auto a = effect_size_a_ci(x, y, 500, 42);
    const auto b = effect_size_a_ci(x, y, 500, 42);
    EXPECT_EQ(a.ci_low, b.ci_low);
    EXPECT_EQ(a.ci_high, b.ci_high);
    EXPECT_LE(a.ci_low, a.a);
    EXPECT_GE(a.ci_high, a.a);
    EXPECT_GE(a.ci_low, 0.0);
    EXPECT_LE(a.ci_high, 1.0);
  }
}

TEST(PValues, StayInUnitInterval) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 12), val(0, 4);
  for (int t = 0; t < 300; ++t) {
    V x(size(rng)), y(size(rng)), z(size(rng));
    for (auto* s : {&x, &y, &z}) {
      for (auto& v : *s) v = val(rng);
    }
    const std::vector<V> groups{x, y, z};
    for (double p : {mann_whitney(x, y).p, mann_whitney_normal_p(x, y), kruskal_wallis(groups).p}) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(GapMetrics, ReportedReductions) {
  const auto control = gap_metrics(82.5, 58.0, 71.2, 60.4);
  EXPECT_NEAR(control.pre_gap, 24.5, 1e-9);
  EXPECT_NEAR(control.post_gap, 10.8, 1e-9);
  EXPECT_NEAR(control.reduction_percent, 55.9, 0.05);
  EXPECT_NEAR(gap_metrics(81.6, 57.8, 75.3, 69.8).reduction_percent, 77.1, 0.7);
  EXPECT_NEAR(gap_metrics(80, 60, 70, 50).reduction_percent, 0.0, 1e-12);
  EXPECT_ERRC(gap_metrics(70, 70, 80, 60), Errc::ZeroPreGap);
}

TEST(MedianSplit, Examples) {
  const auto s = median_split(V{4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_EQ(s.high, (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s.low, (std::vector<std::size_t>{1, 3}));
  EXPECT_TRUE(median_split(V{5, 5, 5}).high.empty());
  EXPECT_EQ(median_split(V{5, 5, 5}).low.size(), 3u);
  EXPECT_ERRC(median_split(V{1}), Errc::TooFewStudents);
}

TEST(MedianSplit, PartitionProperty) {
  std::mt19937_64 rng(113);
  std::uniform_int_distribution<int> val(0, 100);
  V scores(113);
  for (auto& v : scores) v = val(rng);
  const auto s = median_split(scores);
  EXPECT_EQ(s.high.size() + s.low.size(), 113u);
  std::vector<std::size_t> all = s.high;
  all.insert(all.end(), s.low.begin(), s.low.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  for (auto i : s.high) EXPECT_GT(scores[i], s.median);
  for (auto i : s.low) EXPECT_LE(scores[i], s.median);
}

TEST(Summary, MeanAndSampleSd) {
  const auto s = summarize(V{2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_NEAR(s.sd, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_DOUBLE_EQ(summarize(V{3}).sd, 0.0);
  EXPECT_ERRC(summarize(V{}), Errc::EmptySample);
}

}  // namespace
}  // namespace scaffold::stats
