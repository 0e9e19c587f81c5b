#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "scaffold/bkt.hpp"
#include "scaffold/drl/ddqn.hpp"
#include "scaffold/error.hpp"
#include "scaffold/experiment/pipeline.hpp"
#include "scaffold/logic/bank.hpp"
#include "scaffold/logic/formula.hpp"
#include "scaffold/logic/rules.hpp"
#include "scaffold/logic/variants.hpp"
#include "scaffold/scoring.hpp"
#include "scaffold/stats.hpp"

namespace py = pybind11;
namespace fs = std::filesystem;
using namespace scaffold;

namespace {

logic::RuleId rule_named(const std::string& code) {
  const auto id = logic::rule_from_string(code);
  if (!id) throw Error(Errc::InvalidArgument, "unknown rule " + code);
  return *id;
}

std::vector<logic::Formula> parse_all(const std::vector<std::string>& texts) {
  std::vector<logic::Formula> out;
  for (const auto& t : texts) out.push_back(logic::parse_formula(t));
  return out;
}

py::list issues_to_list(const std::vector<logic::BankIssue>& issues) {
  py::list out;
  for (const auto& i : issues) out.append(py::make_tuple(i.problem_id, i.message));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Proof-tutoring experiment core";

  py::exception<Error>(m, "ScaffoldError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = py::module_::import("icap_scaffold._core").attr("ScaffoldError");
      py::object err = type(e.what());
      err.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });

  m.def(
      "bkt_update",
      [](double p, bool correct, double p_init, double p_transit, double p_guess, double p_slip) {
        bkt::BktParams params{p_init, p_transit, p_guess, p_slip};
        params.validate();
        return bkt::bkt_update(p, correct, params);
      },
      py::arg("p"), py::arg("correct"), py::arg("p_init") = 0.01, py::arg("p_transit") = 0.01,
      py::arg("p_guess") = 0.3, py::arg("p_slip") = 0.1, "Knowledge estimate after one observed rule application.");
  m.def("compute_reward", &drl::compute_reward, py::arg("test_score"), py::arg("problem_time"),
        "Test score discounted by normalized problem time.");
  m.def("nlg", &scoring::nlg, py::arg("pretest"), py::arg("posttest"), "Normalized learning gain.");

  m.def(
      "check_rule_application",
      [](const std::string& rule, const std::vector<std::string>& premises, const std::string& derived) {
        const auto ps = parse_all(premises);
        return logic::check_rule_application(rule_named(rule), ps, logic::parse_formula(derived));
      },
      py::arg("rule"), py::arg("premises"), py::arg("derived"));
  m.def(
      "entails",
      [](const std::vector<std::string>& premises, const std::string& conclusion) {
        const auto ps = parse_all(premises);
        return logic::entails(ps, logic::parse_formula(conclusion));
      },
      py::arg("premises"), py::arg("conclusion"));
  m.def(
      "normalize_formula", [](const std::string& text) { return logic::render(logic::parse_formula(text)); },
      py::arg("text"), "Parse and re-render with minimal parentheses.");
  m.def(
      "validate_bank",
      [](const fs::path& path, int seeds) {
        const auto bank = logic::load_bank(path);
        auto issues = logic::validate_bank(bank);
        const auto trips = logic::check_round_trips(bank, 2, seeds);
        issues.insert(issues.end(), trips.begin(), trips.end());
        return issues_to_list(issues);
      },
      py::arg("path"), py::arg("seeds") = 4, "List of (problem_id, message); empty when the bank is clean.");

  auto st = m.def_submodule("stats", "Nonparametric tests and effect sizes");
  st.def(
      "mann_whitney",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = stats::mann_whitney(x, y);
        return py::dict(py::arg("u") = r.u, py::arg("z") = r.z, py::arg("p") = r.p, py::arg("exact") = r.exact);
      },
      py::arg("x"), py::arg("y"));
  st.def(
      "kruskal_wallis",
      [](const std::vector<std::vector<double>>& groups) {
        const auto r = stats::kruskal_wallis(groups);
        return py::dict(py::arg("h") = r.h, py::arg("df") = r.df, py::arg("p") = r.p);
      },
      py::arg("groups"));
  st.def(
      "chi_square",
      [](const std::vector<std::vector<double>>& table) {
        const auto r = stats::chi_square(table);
        return py::dict(py::arg("chi2") = r.chi2, py::arg("df") = r.df, py::arg("p") = r.p);
      },
      py::arg("table"));
  st.def("bonferroni", py::overload_cast<double, std::size_t>(&stats::bonferroni), py::arg("p"), py::arg("m"));
  st.def(
      "effect_size_a",
      [](const std::vector<double>& x, const std::vector<double>& y) { return stats::effect_size_a(x, y); },
      py::arg("x"), py::arg("y"));
  st.def(
      "gap_metrics",
      [](double pre_high, double pre_low, double post_high, double post_low) {
        const auto g = stats::gap_metrics(pre_high, pre_low, post_high, post_low);
        return py::dict(py::arg("pre_gap") = g.pre_gap, py::arg("post_gap") = g.post_gap,
                        py::arg("reduction_percent") = g.reduction_percent);
      },
      py::arg("pre_high"), py::arg("pre_low"), py::arg("post_high"), py::arg("post_low"));

  using experiment::ExperimentConfig;
  py::class_<ExperimentConfig>(m, "Config")
      .def_property(
          "master_seed", [](const ExperimentConfig& c) { return c.master_seed; },
          [](ExperimentConfig& c, std::uint64_t s) {
            c.master_seed = s;
            c.sim.master_seed = s;
          })
      .def_readwrite("bank", &ExperimentConfig::bank)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_property_readonly("hash", &experiment::config_hash)
      .def("to_toml", &experiment::resolved_toml)
      .def("run_directory", &experiment::run_directory)
      .def("__eq__", [](const ExperimentConfig& a, const ExperimentConfig& b) { return a == b; });

  m.def("parse_config", &experiment::parse_config, py::arg("text"), py::arg("base_dir") = fs::current_path());
  m.def("load_config", &experiment::load_config, py::arg("path"));
  m.def("default_bank_dir", &experiment::default_bank_dir);

  m.def(
      "run_pipeline",
      [](const ExperimentConfig& config, const fs::path& run_dir, bool force) {
        std::vector<experiment::PhaseResult> results;
        {
          py::gil_scoped_release release;
          results = experiment::run_pipeline(config, run_dir, {force, {}});
        }
        py::list out;
        for (const auto& r : results) out.append(py::make_tuple(r.name, r.ran));
        return out;
      },
      py::arg("config"), py::arg("run_dir"), py::arg("force") = false,
      "Runs the phases that are out of date; returns (phase, ran) pairs.");
  m.def(
      "report_from_trial",
      [](const ExperimentConfig& config, const fs::path& trial) {
        auto [text, tsv] = experiment::report_from_trial(config, experiment::read_file(trial));
        return py::make_tuple(text, tsv);
      },
      py::arg("config"), py::arg("trial"), "Text and tab-separated renderings of the trial report.");
}
