#include "scaffold/experiment/report.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

#include "scaffold/error.hpp"
#include "scaffold/scoring.hpp"

namespace scaffold::experiment {
namespace {

using sim::Condition;
using sim::kConditions;

constexpr std::array<std::pair<Condition, Condition>, 3> kPairs = {
    std::pair{Condition::Control, Condition::BKT}, std::pair{Condition::Control, Condition::DRL},
    std::pair{Condition::BKT, Condition::DRL}};

std::size_t ci(Condition c) { return static_cast<std::size_t>(c); }

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_p(double p) { return p < 0.001 ? "<.001" : fmt(p, 3); }

stats::Summary summary_or_empty(const std::vector<double>& v) {
  return v.empty() ? stats::Summary{} : stats::summarize(v);
}

struct MetricSpec {
  const char* name;
  bool lower_is_better;
  int digits;
  std::function<std::optional<double>(const sim::SessionLog&)> value;
};

std::vector<double> posttest_values(const sim::SessionLog& log, const std::function<double(const sim::AttemptRecord&)>& f) {
  std::vector<double> v;
  for (const auto& a : log.attempts) {
    if (a.slot.stage == drl::Stage::Posttest) v.push_back(f(a));
  }
  return v;
}

double mean_of(const std::vector<double>& v) { return stats::summarize(v).mean; }

std::vector<MetricSpec> metric_specs() {
  return {
      {"Score", false, 1, [](const sim::SessionLog& l) -> std::optional<double> { return l.posttest_score; }},
      {"NLG", false, 2,
       [](const sim::SessionLog& l) -> std::optional<double> {
         if (l.pretest_score >= 100.0) return std::nullopt;
         return scoring::nlg(l.pretest_score, l.posttest_score);
       }},
      {"Rule Acc.", false, 1,
       [](const sim::SessionLog& l) -> std::optional<double> {
         return 100.0 * mean_of(posttest_values(l, [](const sim::AttemptRecord& a) { return a.score.accuracy; }));
       }},
      {"Time (min)", true, 2,
       [](const sim::SessionLog& l) -> std::optional<double> {
         return mean_of(posttest_values(l, [](const sim::AttemptRecord& a) { return a.attempt.duration_seconds / 60.0; }));
       }},
      {"Steps", true, 1,
       [](const sim::SessionLog& l) -> std::optional<double> {
         return mean_of(posttest_values(l, [](const sim::AttemptRecord& a) {
           return static_cast<double>(a.attempt.steps_in_final_solution);
         }));
       }},
  };
}

double section_minutes(const sim::SessionLog& log, const std::function<bool(const sim::CurriculumSlot&)>& in_section) {
  double s = 0.0;
  for (const auto& a : log.attempts) {
    if (in_section(a.slot)) s += a.attempt.duration_seconds;
  }
  return s / 60.0;
}

}  // namespace

std::string significance_mark(double adjusted_p) {
  if (adjusted_p < 0.05) return "*";
  if (adjusted_p < 0.10) return "†";
  return "";
}

ExperimentReport build_report(std::span<const sim::SessionLog> trial, const RecordHeader& header,
                              int bootstrap_iterations) {
  ExperimentReport r;
  r.header = header;
  std::array<std::vector<const sim::SessionLog*>, 3> groups;
  for (const auto& log : trial) {
    if (!log.complete()) throw Error(Errc::IncompleteTrial, "session of " + log.student_id + " is incomplete");
    groups[ci(log.condition)].push_back(&log);
  }
  for (Condition c : kConditions) {
    r.students[ci(c)] = static_cast<int>(groups[ci(c)].size());
    if (groups[ci(c)].size() < 2) {
      throw Error(Errc::IncompleteTrial, std::string(sim::to_string(c)) + " has fewer than two completed sessions");
    }
  }

  const std::vector<std::pair<std::string, std::function<bool(const sim::CurriculumSlot&)>>> sections = {
      {"Pretest", [](const sim::CurriculumSlot& s) { return s.stage == drl::Stage::Pretest; }},
      {"Training", [](const sim::CurriculumSlot& s) { return s.stage == drl::Stage::Training; }},
      {"Level-End", [](const sim::CurriculumSlot& s) { return s.stage == drl::Stage::LevelEnd; }},
      {"Posttest", [](const sim::CurriculumSlot& s) { return s.stage == drl::Stage::Posttest; }},
      {"Total", [](const sim::CurriculumSlot&) { return true; }},
  };
  for (const auto& [name, pred] : sections) {
    SectionTimes row{name, {}};
    for (Condition c : kConditions) {
      std::vector<double> v;
      for (const auto* log : groups[ci(c)]) v.push_back(section_minutes(*log, pred));
      row.by_condition[ci(c)] = stats::summarize(v);
    }
    r.times.push_back(std::move(row));
  }

  for (Condition c : kConditions) {
    auto& counts = r.types.counts[ci(c)];
    for (const auto* log : groups[ci(c)]) {
      for (const auto& a : log->attempts) {
        if (a.slot.adaptive()) ++counts[index_of(a.attempt.assigned_type)];
      }
    }
    const int total = counts[0] + counts[1] + counts[2];
    for (std::size_t t = 0; t < 3; ++t) r.types.percent[ci(c)][t] = total ? 100.0 * counts[t] / total : 0.0;
  }
  {
    std::vector<double> raw;
    for (auto [a, b] : kPairs) {
      std::vector<std::vector<double>> table(2);
      for (std::size_t t = 0; t < 3; ++t) {
        const int x = r.types.counts[ci(a)][t], y = r.types.counts[ci(b)][t];
        if (x + y == 0) continue;
        table[0].push_back(x);
        table[1].push_back(y);
      }
      PairTest pt;
      pt.a = a;
      pt.b = b;
      if (table[0].size() >= 2) {
        const auto res = stats::chi_square(table);
        pt.statistic = res.chi2;
        pt.df = res.df;
        pt.p = res.p;
      }
      raw.push_back(pt.p);
      r.types.tests.push_back(pt);
    }
    const auto adj = stats::bonferroni(raw, raw.size());
    for (std::size_t i = 0; i < adj.size(); ++i) r.types.tests[i].p_adjusted = adj[i];
  }

  std::uint64_t stream = header.master_seed;
  for (const auto& spec : metric_specs()) {
    MetricRow row{spec.name, {}, {}, {}};
    std::array<std::vector<double>, 3> values;
    for (Condition c : kConditions) {
      for (const auto* log : groups[ci(c)]) {
        if (auto v = spec.value(*log)) values[ci(c)].push_back(*v);
      }
      row.by_condition[ci(c)] = summary_or_empty(values[ci(c)]);
    }
    row.omnibus = stats::kruskal_wallis(values);
    std::vector<double> raw;
    for (auto [a, b] : kPairs) {
      const auto mw = stats::mann_whitney(values[ci(a)], values[ci(b)]);
      PairTest pt{a, b, mw.u, 0, mw.p, mw.p, std::nullopt};
      // A is the probability that the second group does better.
      const auto& better = spec.lower_is_better ? values[ci(a)] : values[ci(b)];
      const auto& worse = spec.lower_is_better ? values[ci(b)] : values[ci(a)];
      pt.effect = stats::effect_size_a_ci(better, worse, bootstrap_iterations, ++stream);
      raw.push_back(mw.p);
      row.tests.push_back(pt);
    }
    const auto adj = stats::bonferroni(raw, raw.size());
    for (std::size_t i = 0; i < adj.size(); ++i) row.tests[i].p_adjusted = adj[i];
    r.posttest.push_back(std::move(row));
  }

  std::vector<double> pretest;
  for (const auto& log : trial) pretest.push_back(log.pretest_score);
  const auto split = stats::median_split(pretest);
  r.pretest_median = split.median;
  std::vector<bool> high(trial.size(), false);
  for (std::size_t i : split.high) high[i] = true;
  for (Condition c : kConditions) {
    std::vector<double> lp, lq, hp, hq;
    for (std::size_t i = 0; i < trial.size(); ++i) {
      if (trial[i].condition != c) continue;
      (high[i] ? hp : lp).push_back(trial[i].pretest_score);
      (high[i] ? hq : lq).push_back(trial[i].posttest_score);
    }
    SubgroupRow row{c, summary_or_empty(lp), summary_or_empty(lq), summary_or_empty(hp), summary_or_empty(hq),
                    std::nullopt};
    if (!lp.empty() && !hp.empty()) {
      try {
        row.gap = stats::gap_metrics(row.high_pre.mean, row.low_pre.mean, row.high_post.mean, row.low_post.mean);
      } catch (const Error& e) {
        if (e.code() != Errc::ZeroPreGap) throw;
      }
    }
    r.subgroups.push_back(row);
  }
  return r;
}

namespace {

std::string mean_sd(const stats::Summary& s, int digits) {
  if (s.n == 0) return "-";
  return fmt(s.mean, digits) + " (" + fmt(s.sd, digits) + ")";
}

std::string pair_label(const PairTest& t) {
  return std::string(sim::to_string(t.a)) + " vs " + std::string(sim::to_string(t.b));
}

std::string effect_text(const PairTest& t) {
  if (!t.effect) return "";
  return fmt(t.effect->a, 2) + " [" + fmt(t.effect->ci_low, 2) + ", " + fmt(t.effect->ci_high, 2) + "]";
}

/// Rows of cells rendered either as aligned text or tab-separated values.
class Table {
 public:
  Table(std::string title, std::vector<std::string> header) : title_(std::move(title)) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string render(ReportFormat f) const {
    std::ostringstream out;
    if (f == ReportFormat::Delimited) {
      out << "# " << title_ << "\n";
      for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
        out << "\n";
      }
      return out.str();
    }
    std::vector<std::size_t> width;
    for (const auto& row : rows_) {
      width.resize(std::max(width.size(), row.size()), 0);
      for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], display_width(row[i]));
    }
    out << title_ << "\n";
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      std::string line;
      for (std::size_t i = 0; i < rows_[r].size(); ++i) {
        if (i) line += "  ";
        line += rows_[r][i];
        if (i + 1 < rows_[r].size()) line += std::string(width[i] - display_width(rows_[r][i]), ' ');
      }
      out << line << "\n";
      if (r == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        out << std::string(total - 2, '-') << "\n";
      }
    }
    return out.str();
  }

 private:
  static std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  }

  std::string title_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace

std::string render_report(const ExperimentReport& r, ReportFormat format) {
  std::ostringstream out;
  const std::string hdr = "config_hash " + r.header.config_hash + "  master_seed " + std::to_string(r.header.master_seed);
  out << (format == ReportFormat::Delimited ? "# " : "") << hdr << "\n\n";

  auto cond_label = [&](Condition c) {
    return std::string(sim::to_string(c)) + " (" + std::to_string(r.students[ci(c)]) + ")";
  };

  std::vector<std::string> time_head{"Group (N)"};
  for (const auto& s : r.times) time_head.push_back(s.section);
  for (ProblemType t : kProblemTypes) time_head.push_back(std::string(to_string(t)));
  Table times("Time by tutor section (minutes per student, Mean (SD)) and training problem types", time_head);
  for (Condition c : kConditions) {
    std::vector<std::string> row{cond_label(c)};
    for (const auto& s : r.times) row.push_back(mean_sd(s.by_condition[ci(c)], 1));
    for (std::size_t t = 0; t < 3; ++t) {
      row.push_back(std::to_string(r.types.counts[ci(c)][t]) + " (" + fmt(r.types.percent[ci(c)][t], 1) + "%)");
    }
    times.add(row);
  }
  out << times.render(format) << "\n";

  Table dist("Problem-type distribution, pairwise chi-square (Bonferroni-adjusted)",
             {"Comparison", "chi2", "df", "p", "p_adj", "sig"});
  for (const auto& t : r.types.tests) {
    dist.add({pair_label(t), fmt(t.statistic, 2), std::to_string(t.df), format_p(t.p), format_p(t.p_adjusted),
              significance_mark(t.p_adjusted)});
  }
  out << dist.render(format) << "\n";

  const auto specs = metric_specs();
  std::vector<std::string> head{"Group (N)"};
  for (const auto& m : r.posttest) head.push_back(m.metric);
  Table post("Average per-problem posttest performance (Mean (SD))", head);
  for (Condition c : kConditions) {
    std::vector<std::string> row{cond_label(c)};
    for (std::size_t m = 0; m < r.posttest.size(); ++m) {
      const auto& metric = r.posttest[m];
      std::string mark;
      if (c != Condition::Control) {
        // Marked against Control, as in the comparison column.
        for (const auto& t : metric.tests) {
          if (t.a == Condition::Control && t.b == c) mark = significance_mark(t.p_adjusted);
        }
      }
      row.push_back(mean_sd(metric.by_condition[ci(c)], specs[m].digits) + mark);
    }
    post.add(row);
  }
  out << post.render(format) << "\n";

  Table tests("Pairwise Mann-Whitney tests (Bonferroni-adjusted); A = P(second group does better) [95% CI]",
              {"Metric", "Comparison", "U", "p", "p_adj", "A [95% CI]", "sig"});
  for (const auto& m : r.posttest) {
    for (const auto& t : m.tests) {
      tests.add({m.metric, pair_label(t), fmt(t.statistic, 1), format_p(t.p), format_p(t.p_adjusted), effect_text(t),
                 significance_mark(t.p_adjusted)});
    }
  }
  out << tests.render(format) << "\n";

  Table omni("Kruskal-Wallis across conditions", {"Metric", "H", "df", "p"});
  for (const auto& m : r.posttest) {
    omni.add({m.metric, fmt(m.omnibus.h, 2), std::to_string(m.omnibus.df), format_p(m.omnibus.p)});
  }
  out << omni.render(format) << "\n";

  Table sub("Prior-knowledge subgroups (median pretest split at " + fmt(r.pretest_median, 1) +
                "; ties go Low) and achievement gap",
            {"Group", "Low n", "Low pre", "Low post", "High n", "High pre", "High post", "Pre gap", "Post gap",
             "Reduction %"});
  for (const auto& s : r.subgroups) {
    std::vector<std::string> row{std::string(sim::to_string(s.condition)), std::to_string(s.low_pre.n),
                                 mean_sd(s.low_pre, 1), mean_sd(s.low_post, 1), std::to_string(s.high_pre.n),
                                 mean_sd(s.high_pre, 1), mean_sd(s.high_post, 1)};
    if (s.gap) {
      row.push_back(fmt(s.gap->pre_gap, 1));
      row.push_back(fmt(s.gap->post_gap, 1));
      row.push_back(fmt(s.gap->reduction_percent, 1));
    } else {
      row.insert(row.end(), {"-", "-", "-"});
    }
    sub.add(row);
  }
  out << sub.render(format) << "\n";

  const std::string prefix = format == ReportFormat::Delimited ? "# " : "";
  out << prefix << "Notes:\n";
  out << prefix << "* adjusted p < 0.05; † adjusted p < 0.10. Pairwise p values are Bonferroni-adjusted over the"
      << " three comparisons of each family.\n";
  out << prefix << "Chi-square tests on tables larger than 2x2 are uncorrected; a type absent from both groups leaves"
      << " a 2x2 table, which gets the Yates correction.\n";
  out << prefix << "Mixed-effects regression with a problem random intercept is not performed; condition effects are"
      << " tested with the nonparametric suite above.\n";
  out << prefix << "NLG excludes students with a pretest of 100.\n";
  return out.str();
}

}  // namespace scaffold::experiment
