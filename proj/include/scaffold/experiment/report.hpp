#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scaffold/experiment/records.hpp"
#include "scaffold/stats.hpp"

namespace scaffold::experiment {

enum class ReportFormat { Text, Delimited };

/// "*" below 0.05, "†" below 0.10, otherwise empty; applied to adjusted p.
std::string significance_mark(double adjusted_p);

struct PairTest {
  sim::Condition a = sim::Condition::Control;
  sim::Condition b = sim::Condition::BKT;
  double statistic = 0.0;  // chi-square or Mann-Whitney U
  int df = 0;              // chi-square only
  double p = 1.0;
  double p_adjusted = 1.0;
  std::optional<stats::EffectSize> effect;  // A for measurement comparisons
};

/// One row of the time table, minutes per student.
struct SectionTimes {
  std::string section;
  std::array<stats::Summary, 3> by_condition;
};

struct TypeDistribution {
  std::array<std::array<int, 3>, 3> counts{};  // [condition][type]
  std::array<std::array<double, 3>, 3> percent{};
  std::vector<PairTest> tests;  // chi-square on 2x3 tables
};

struct MetricRow {
  std::string metric;
  std::array<stats::Summary, 3> by_condition;
  stats::KruskalWallisResult omnibus;
  std::vector<PairTest> tests;  // Mann-Whitney with A
};

struct SubgroupRow {
  sim::Condition condition = sim::Condition::Control;
  stats::Summary low_pre, low_post, high_pre, high_post;
  std::optional<stats::GapMetrics> gap;  // empty when a subgroup is empty or the pretest gap is zero
};

struct ExperimentReport {
  RecordHeader header;
  std::array<int, 3> students{};
  std::vector<SectionTimes> times;
  TypeDistribution types;
  std::vector<MetricRow> posttest;
  double pretest_median = 0.0;
  std::vector<SubgroupRow> subgroups;
};

/// Throws Error{IncompleteTrial} if a session is incomplete or a condition
/// has fewer than two students.
ExperimentReport build_report(std::span<const sim::SessionLog> trial, const RecordHeader& header,
                              int bootstrap_iterations);

std::string render_report(const ExperimentReport& report, ReportFormat format);

}  // namespace scaffold::experiment
