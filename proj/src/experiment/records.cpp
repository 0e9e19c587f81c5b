#include "scaffold/experiment/records.hpp"

#include <istream>
#include <ostream>

#include "scaffold/error.hpp"

namespace scaffold::experiment {
namespace {

using json = nlohmann::json;

ProblemType type_from(const json& j) {
  const auto t = problem_type_from_string(j.get<std::string>());
  if (!t) throw Error(Errc::RecordFormat, "unknown problem type " + j.dump());
  return *t;
}

logic::RuleId rule_from(const std::string& s) {
  const auto r = logic::rule_from_string(s);
  if (!r) throw Error(Errc::RecordFormat, "unknown rule " + s);
  return *r;
}

std::string_view source_name(sim::DecisionSource s) {
  switch (s) {
    case sim::DecisionSource::Uniform: return "uniform";
    case sim::DecisionSource::Bkt: return "bkt";
    case sim::DecisionSource::Drl: return "drl";
  }
  return "?";
}

sim::DecisionSource source_from(const std::string& s) {
  for (auto src : {sim::DecisionSource::Uniform, sim::DecisionSource::Bkt, sim::DecisionSource::Drl}) {
    if (source_name(src) == s) return src;
  }
  throw Error(Errc::RecordFormat, "unknown decision source " + s);
}

json attempt_json(const sim::SessionLog& log, const sim::AttemptRecord& r) {
  json apps = json::array();
  for (const auto& a : r.attempt.rule_applications) apps.push_back({logic::to_string(a.rule), a.correct});
  json knowledge = json::object();
  for (const auto& [rule, p] : r.knowledge) knowledge[std::string(logic::to_string(rule))] = p;
  json decision = nullptr;
  if (r.decision) {
    const auto& d = *r.decision;
    decision = {{"source", source_name(d.source)},
                {"raw", to_string(d.raw)},
                {"served", to_string(d.served)},
                {"overridden", d.overridden},
                {"ps_branch", d.ps_branch},
                {"sign_sum", d.sign_sum},
                {"q", d.q},
                {"rationale", d.rationale}};
  }
  return {{"student_id", log.student_id},
          {"student_index", log.student_index},
          {"condition", sim::to_string(log.condition)},
          {"level", r.slot.level},
          {"slot", r.slot.slot},
          {"stage", drl::to_string(r.slot.stage)},
          {"problem_id", r.slot.problem_id},
          {"type", to_string(r.attempt.assigned_type)},
          {"applications", apps},
          {"steps", r.attempt.steps_in_final_solution},
          {"duration_seconds", r.attempt.duration_seconds},
          {"hints", r.attempt.hints_requested},
          {"score",
           {{"accuracy", r.score.accuracy},
            {"optimality", r.score.optimality},
            {"time_efficiency", r.score.time_efficiency},
            {"composite", r.score.composite}}},
          {"knowledge", knowledge},
          {"latent", r.latent},
          {"decision", decision}};
}

sim::AttemptRecord attempt_from(const json& j) {
  sim::AttemptRecord r;
  r.slot.level = j.at("level").get<int>();
  r.slot.slot = j.at("slot").get<int>();
  r.slot.stage = drl::stage_from_string(j.at("stage").get<std::string>());
  r.slot.problem_id = j.at("problem_id").get<std::string>();
  r.attempt.student_id = j.at("student_id").get<std::string>();
  r.attempt.problem_id = r.slot.problem_id;
  r.attempt.assigned_type = type_from(j.at("type"));
  for (const auto& a : j.at("applications")) {
    r.attempt.rule_applications.push_back({rule_from(a.at(0).get<std::string>()), a.at(1).get<bool>()});
  }
  r.attempt.steps_in_final_solution = j.at("steps").get<int>();
  r.attempt.duration_seconds = j.at("duration_seconds").get<double>();
  r.attempt.hints_requested = j.at("hints").get<int>();
  const auto& s = j.at("score");
  r.score = {s.at("accuracy").get<double>(), s.at("optimality").get<double>(), s.at("time_efficiency").get<double>(),
             s.at("composite").get<double>()};
  for (const auto& [k, v] : j.at("knowledge").items()) r.knowledge[rule_from(k)] = v.get<double>();
  r.latent = j.at("latent").get<sim::Mastery>();
  if (const auto& d = j.at("decision"); !d.is_null()) {
    sim::DecisionRecord rec;
    rec.level = r.slot.level;
    rec.slot = r.slot.slot;
    rec.source = source_from(d.at("source").get<std::string>());
    rec.raw = type_from(d.at("raw"));
    rec.served = type_from(d.at("served"));
    rec.overridden = d.at("overridden").get<bool>();
    rec.ps_branch = d.at("ps_branch").get<bool>();
    rec.sign_sum = d.at("sign_sum").get<double>();
    rec.q = d.at("q").get<std::array<double, 3>>();
    rec.rationale = d.at("rationale").get<std::string>();
    r.decision = std::move(rec);
  }
  return r;
}

RecordHeader read_header(std::istream& in, const char* schema, json* raw) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::RecordFormat, "empty record file");
  try {
    const auto j = json::parse(line);
    RecordHeader h;
    h.schema = j.at("schema").get<std::string>();
    if (h.schema != schema) throw Error(Errc::RecordFormat, "expected schema " + std::string(schema) + ", found " + h.schema);
    h.version = j.at("version").get<int>();
    if (h.version != kRecordVersion) {
      throw Error(Errc::RecordFormat, "unsupported " + h.schema + " version " + std::to_string(h.version));
    }
    h.config_hash = j.at("config_hash").get<std::string>();
    h.master_seed = j.at("master_seed").get<std::uint64_t>();
    h.phase = j.value("phase", "");
    if (raw) *raw = j;
    return h;
  } catch (const json::exception& e) {
    throw Error(Errc::RecordFormat, std::string("line 1: bad header: ") + e.what());
  }
}

template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  for (int n = 2; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(Errc::RecordFormat, "line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(Errc::RecordFormat, "line " + std::to_string(n) + ": " + e.what());
    }
  }
}

}  // namespace

json RecordHeader::to_json() const {
  return {{"schema", schema}, {"version", version}, {"config_hash", config_hash}, {"master_seed", master_seed},
          {"phase", phase}};
}

void write_session_logs(std::ostream& out, RecordHeader header, std::span<const sim::SessionLog> logs) {
  header.schema = kSessionSchema;
  header.version = kRecordVersion;
  out << header.to_json().dump() << "\n";
  for (const auto& log : logs) {
    for (const auto& r : log.attempts) out << attempt_json(log, r).dump() << "\n";
  }
}

SessionFile read_session_logs(std::istream& in) {
  SessionFile f;
  f.header = read_header(in, kSessionSchema, nullptr);
  for_each_line(in, [&](const json& j) {
    const auto id = j.at("student_id").get<std::string>();
    if (f.logs.empty() || f.logs.back().student_id != id) {
      sim::SessionLog log;
      log.student_id = id;
      log.student_index = j.at("student_index").get<int>();
      log.condition = sim::condition_from_string(j.at("condition").get<std::string>());
      f.logs.push_back(std::move(log));
    }
    f.logs.back().attempts.push_back(attempt_from(j));
  });
  for (auto& log : f.logs) sim::tally_test_scores(log);
  return f;
}

void write_transitions(std::ostream& out, RecordHeader header, const drl::Normalizer& normalizer,
                       std::span<const drl::Transition> transitions) {
  header.schema = kTransitionSchema;
  header.version = kRecordVersion;
  auto h = header.to_json();
  h["normalizer"] = drl::normalizer_to_json(normalizer);
  out << h.dump() << "\n";
  for (const auto& t : transitions) {
    out << json{{"student_id", t.student_id},
                {"decision_index", t.decision_index},
                {"state", t.state},
                {"action", to_string(t.action)},
                {"reward", t.reward},
                {"next_state", t.next_state},
                {"terminal", t.terminal}}
               .dump()
        << "\n";
  }
}

TransitionFile read_transitions(std::istream& in) {
  TransitionFile f;
  json raw;
  f.header = read_header(in, kTransitionSchema, &raw);
  try {
    f.normalizer = drl::normalizer_from_json(raw.at("normalizer"));
  } catch (const std::exception& e) {
    throw Error(Errc::RecordFormat, std::string("line 1: ") + e.what());
  }
  for_each_line(in, [&](const json& j) {
    drl::Transition t;
    t.student_id = j.at("student_id").get<std::string>();
    t.decision_index = j.at("decision_index").get<int>();
    t.state = j.at("state").get<std::vector<double>>();
    t.action = type_from(j.at("action"));
    t.reward = j.at("reward").get<double>();
    t.next_state = j.at("next_state").get<std::vector<double>>();
    t.terminal = j.at("terminal").get<bool>();
    f.transitions.push_back(std::move(t));
  });
  return f;
}

}  // namespace scaffold::experiment
