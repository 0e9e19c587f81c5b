#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scaffold::stats {

struct Sample {
  std::string label;
  std::vector<double> values;
};

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // sample SD (n - 1); 0 for a single value
  std::size_t n = 0;
};

/// Throws Error{EmptySample}.
Summary summarize(std::span<const double> values);

/// Midranks (1-based) of the values in their original order.
std::vector<double> midranks(std::span<const double> values);

struct MannWhitneyResult {
  double u = 0.0;       // U for the first sample
  double z = 0.0;       // standardized U, tie-corrected, no continuity correction
  double p = 1.0;       // two-sided
  bool exact = false;
};

/// Exact enumeration when n + m <= 12, otherwise the normal approximation
/// with tie and continuity corrections. Throws Error{EmptySample}.
MannWhitneyResult mann_whitney(std::span<const double> x, std::span<const double> y);

/// Two-sided p by enumerating every split of the pooled midranks.
double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y);
double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y);

struct KruskalWallisResult {
  double h = 0.0;
  int df = 0;
  double p = 1.0;
};

/// Tie-corrected H. Throws Error{TooFewGroups} for fewer than 2 groups and
/// Error{EmptySample} for an empty group.
KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups);

struct ChiSquareResult {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

/// Pearson test of homogeneity. 2x2 tables get the Yates continuity
/// correction; larger tables are uncorrected. Throws
/// Error{DegenerateTable} for fewer than 2 rows or columns, ragged rows,
/// negative counts, or an all-zero row or column.
ChiSquareResult chi_square(const std::vector<std::vector<double>>& table);

/// min(1, p * m).
double bonferroni(double p, std::size_t m);
std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double x, int df);

struct EffectSize {
  double a = 0.5;
  double ci_low = 0.5;
  double ci_high = 0.5;
};

/// Probability that a draw from x exceeds one from y, ties counted half.
double effect_size_a(std::span<const double> x, std::span<const double> y);

/// A with a 95% percentile bootstrap interval. Each iteration resamples both
/// groups with replacement from a stream derived from (seed, iteration); the
/// interval is widened to include the point estimate if needed.
EffectSize effect_size_a_ci(std::span<const double> x, std::span<const double> y,
                            int bootstrap_iters = 2000, std::uint64_t seed = 0);

struct GapMetrics {
  double pre_gap = 0.0;
  double post_gap = 0.0;
  double reduction_percent = 0.0;
};

/// Throws Error{ZeroPreGap}.
GapMetrics gap_metrics(double pre_high, double pre_low, double post_high, double post_low);

struct MedianSplit {
  double median = 0.0;
  std::vector<std::size_t> high;  // indices strictly above the median
  std::vector<std::size_t> low;   // indices at or below the median
};

/// Throws Error{TooFewStudents} for fewer than 2 scores.
MedianSplit median_split(std::span<const double> scores);

}  // namespace scaffold::stats
