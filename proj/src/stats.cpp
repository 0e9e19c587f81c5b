#include "scaffold/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "scaffold/error.hpp"

namespace scaffold::stats {
namespace {

void require_nonempty(std::span<const double> v, const char* what) {
  if (v.empty()) throw Error(Errc::EmptySample, std::string(what) + " is empty");
}

std::vector<double> pooled(std::span<const double> x, std::span<const double> y) {
  std::vector<double> all(x.begin(), x.end());
  all.insert(all.end(), y.begin(), y.end());
  return all;
}

// sum of t^3 - t over tie groups
double tie_term(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double t = static_cast<double>(j - i);
    total += t * t * t - t;
    i = j;
  }
  return total;
}

double u_statistic(std::span<const double> x, std::span<const double> y) {
  const auto ranks = midranks(pooled(x, y));
  const double n = static_cast<double>(x.size());
  const double r1 = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(x.size()), 0.0);
  return r1 - n * (n + 1.0) / 2.0;
}

double u_sigma(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  const double total = n + m;
  const double ties = tie_term(pooled(x, y));
  const double var = n * m / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0)));
  return var > 0.0 ? std::sqrt(var) : 0.0;
}

double normal_two_sided(double z) { return std::min(1.0, boost::math::erfc(std::abs(z) / std::sqrt(2.0))); }

}  // namespace

Summary summarize(std::span<const double> values) {
  require_nonempty(values, "sample");
  Summary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y) {
  require_nonempty(x, "first sample");
  require_nonempty(y, "second sample");
  const auto ranks = midranks(pooled(x, y));
  const std::size_t n = x.size(), total = ranks.size();
  if (total > 30) throw Error(Errc::InvalidArgument, "exact enumeration limited to 30 observations");
  const double center = static_cast<double>(n) * static_cast<double>(y.size()) / 2.0;
  const double offset = static_cast<double>(n) * static_cast<double>(n + 1) / 2.0;
  const double observed = std::abs(u_statistic(x, y) - center);

  std::vector<bool> pick(total, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(n), true);
  std::uint64_t extreme = 0, count = 0;
  do {
    double r = 0.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (pick[i]) r += ranks[i];
    }
    if (std::abs(r - offset - center) >= observed - 1e-9) ++extreme;
    ++count;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(count);
}

double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y) {
  require_nonempty(x, "first sample");
  require_nonempty(y, "second sample");
  const double sigma = u_sigma(x, y);
  if (sigma == 0.0) return 1.0;
  const double center = static_cast<double>(x.size()) * static_cast<double>(y.size()) / 2.0;
  const double dev = std::max(0.0, std::abs(u_statistic(x, y) - center) - 0.5);
  return normal_two_sided(dev / sigma);
}

MannWhitneyResult mann_whitney(std::span<const double> x, std::span<const double> y) {
  require_nonempty(x, "first sample");
  require_nonempty(y, "second sample");
  MannWhitneyResult r;
  r.u = u_statistic(x, y);
  const double sigma = u_sigma(x, y);
  const double center = static_cast<double>(x.size()) * static_cast<double>(y.size()) / 2.0;
  r.z = sigma > 0.0 ? (r.u - center) / sigma : 0.0;
  r.exact = x.size() + y.size() <= 12;
  r.p = r.exact ? mann_whitney_exact_p(x, y) : mann_whitney_normal_p(x, y);
  return r;
}

double chi_square_sf(double x, int df) {
  if (df <= 0) throw Error(Errc::InvalidArgument, "degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(df / 2.0, x / 2.0);
}

KruskalWallisResult kruskal_wallis(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw Error(Errc::TooFewGroups, "need at least two groups");
  std::vector<double> all;
  for (const auto& g : groups) {
    require_nonempty(g, "group");
    all.insert(all.end(), g.begin(), g.end());
  }
  const auto ranks = midranks(all);
  const double total = static_cast<double>(all.size());
  double sum = 0.0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) r += ranks[at + i];
    at += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  KruskalWallisResult out;
  out.df = static_cast<int>(groups.size()) - 1;
  const double correction = 1.0 - tie_term(all) / (total * total * total - total);
  if (correction <= 0.0) return out;
  out.h = std::max(0.0, (12.0 / (total * (total + 1.0)) * sum - 3.0 * (total + 1.0)) / correction);
  out.p = chi_square_sf(out.h, out.df);
  return out;
}

ChiSquareResult chi_square(const std::vector<std::vector<double>>& table) {
  if (table.size() < 2 || table.front().size() < 2) {
    throw Error(Errc::DegenerateTable, "contingency table needs at least 2 rows and 2 columns");
  }
  const std::size_t cols = table.front().size();
  std::vector<double> row_sum(table.size(), 0.0), col_sum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != cols) throw Error(Errc::DegenerateTable, "ragged contingency table");
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = table[i][j];
      if (c < 0.0 || !std::isfinite(c)) throw Error(Errc::DegenerateTable, "counts must be finite and >= 0");
      row_sum[i] += c;
      col_sum[j] += c;
      total += c;
    }
  }
  for (double s : row_sum) {
    if (s <= 0.0) throw Error(Errc::DegenerateTable, "all-zero row");
  }
  for (double s : col_sum) {
    if (s <= 0.0) throw Error(Errc::DegenerateTable, "all-zero column");
  }
  ChiSquareResult r;
  const bool yates = table.size() == 2 && cols == 2;
  for (std::size_t i = 0; i < table.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double expected = row_sum[i] * col_sum[j] / total;
      double dev = std::abs(table[i][j] - expected);
      if (yates) dev = std::max(0.0, dev - 0.5);
      r.chi2 += dev * dev / expected;
    }
  }
  r.df = static_cast<int>((table.size() - 1) * (cols - 1));
  r.p = chi_square_sf(r.chi2, r.df);
  return r;
}

double bonferroni(double p, std::size_t m) { return std::min(1.0, p * static_cast<double>(m)); }

std::vector<double> bonferroni(std::span<const double> p_values, std::size_t m) {
  if (m < p_values.size()) throw Error(Errc::InvalidArgument, "m is smaller than the number of comparisons");
  std::vector<double> out;
  out.reserve(p_values.size());
  for (double p : p_values) out.push_back(bonferroni(p, m));
  return out;
}

double effect_size_a(std::span<const double> x, std::span<const double> y) {
  require_nonempty(x, "first sample");
  require_nonempty(y, "second sample");
  double wins = 0.0;
  for (double a : x) {
    for (double b : y) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
  }
  return wins / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

EffectSize effect_size_a_ci(std::span<const double> x, std::span<const double> y, int iters,
                            std::uint64_t seed) {
  EffectSize out;
  out.a = effect_size_a(x, y);
  if (iters < 1) throw Error(Errc::InvalidArgument, "bootstrap needs at least one iteration");
  std::vector<double> draws(static_cast<std::size_t>(iters));
  std::vector<double> bx(x.size()), by(y.size());
  for (int it = 0; it < iters; ++it) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(it)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> px(0, x.size() - 1), py(0, y.size() - 1);
    for (auto& v : bx) v = x[px(rng)];
    for (auto& v : by) v = y[py(rng)];
    draws[static_cast<std::size_t>(it)] = effect_size_a(bx, by);
  }
  std::sort(draws.begin(), draws.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(draws.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(draws.size() - 1, lo + 1);
    return draws[lo] + (pos - static_cast<double>(lo)) * (draws[hi] - draws[lo]);
  };
  out.ci_low = std::min(out.a, quantile(0.025));
  out.ci_high = std::max(out.a, quantile(0.975));
  return out;
}

GapMetrics gap_metrics(double pre_high, double pre_low, double post_high, double post_low) {
  GapMetrics g;
  g.pre_gap = pre_high - pre_low;
  if (g.pre_gap == 0.0) throw Error(Errc::ZeroPreGap, "pre-test gap is zero");
  g.post_gap = post_high - post_low;
  g.reduction_percent = (1.0 - g.post_gap / g.pre_gap) * 100.0;
  return g;
}

MedianSplit median_split(std::span<const double> scores) {
  if (scores.size() < 2) throw Error(Errc::TooFewStudents, "median split needs at least two scores");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  MedianSplit out;
  out.median = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i] > out.median ? out.high : out.low).push_back(i);
  }
  return out;
}

}  // namespace scaffold::stats
