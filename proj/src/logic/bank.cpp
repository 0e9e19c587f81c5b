#include "scaffold/logic/bank.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "scaffold/error.hpp"

namespace scaffold::logic {

using nlohmann::json;

ProblemBank::ProblemBank(std::vector<Problem> problems) : problems_(std::move(problems)) {}

const Problem* ProblemBank::find(const std::string& id) const {
  auto it = std::find_if(problems_.begin(), problems_.end(), [&](const Problem& p) { return p.id == id; });
  return it == problems_.end() ? nullptr : &*it;
}

const Problem& ProblemBank::at(const std::string& id) const {
  const Problem* p = find(id);
  if (p == nullptr) throw Error(Errc::BankFormat, "problem '" + id + "' not in bank");
  return *p;
}

std::vector<const Problem*> ProblemBank::level(int level) const {
  std::vector<const Problem*> out;
  for (const auto& p : problems_) {
    if (p.level == level) out.push_back(&p);
  }
  std::sort(out.begin(), out.end(), [](const Problem* a, const Problem* b) { return a->index < b->index; });
  return out;
}

namespace {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(Errc::BankFormat, where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::BankFormat, where + ": field '" + key + "': " + e.what());
  }
}

Formula formula_field(const std::string& text, const std::string& where) {
  try {
    return parse_formula(text);
  } catch (const SyntaxError& e) {
    throw Error(Errc::BankFormat, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::BankFormat, where + ": " + e.what());
  }
}

RuleId rule_field(const std::string& code, const std::string& where) {
  auto r = rule_from_string(code);
  if (!r) throw Error(Errc::BankFormat, where + ": unknown rule '" + code + "'");
  return *r;
}

Problem parse_problem(const json& j, int level, int difficulty, const std::string& source) {
  const auto id = field<std::string>(j, "id", source);
  const std::string where = source + " problem " + id;

  const auto dot = id.find('.');
  if (dot == std::string::npos) throw Error(Errc::BankFormat, where + ": id must be level.index");
  int id_level = 0;
  int index = 0;
  try {
    id_level = std::stoi(id.substr(0, dot));
    index = std::stoi(id.substr(dot + 1));
  } catch (const std::exception&) {
    throw Error(Errc::BankFormat, where + ": id must be level.index");
  }
  if (id_level != level) throw Error(Errc::BankFormat, where + ": id does not match document level");

  std::vector<Formula> givens;
  for (const auto& g : field<std::vector<std::string>>(j, "givens", where)) {
    givens.push_back(formula_field(g, where));
  }
  Formula conclusion = formula_field(field<std::string>(j, "conclusion", where), where);

  ProofGraph graph;
  graph.conclusion_id = field<std::string>(j, "conclusionNode", where);
  const json& nodes = j.contains("solution") ? j.at("solution") : json::array();
  if (!nodes.is_array() || nodes.empty()) throw Error(Errc::BankFormat, where + ": empty solution");
  for (const auto& n : nodes) {
    const auto nid = field<std::string>(n, "id", where);
    const std::string nwhere = where + " node " + nid;
    Formula f = formula_field(field<std::string>(n, "formula", nwhere), nwhere);
    Justification just = Justification::given();
    if (n.contains("rule")) {
      just = Justification::derived(rule_field(field<std::string>(n, "rule", nwhere), nwhere),
                                    field<std::vector<std::string>>(n, "parents", nwhere));
    }
    graph.nodes.push_back({nid, std::move(f), std::move(just)});
  }

  std::set<RuleId> required;
  for (const auto& r : field<std::vector<std::string>>(j, "requiredRules", where)) {
    required.insert(rule_field(r, where));
  }
  return Problem{id, level, index, std::move(givens), std::move(conclusion), std::move(graph),
                 std::move(required), j.value("difficulty", difficulty)};
}

void load_document(const std::filesystem::path& file, std::vector<Problem>& out) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::BankFormat, "cannot open " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::BankFormat, file.string() + ": " + e.what());
  }
  const std::string source = file.filename().string();
  const int level = field<int>(doc, "level", source);
  const int difficulty = doc.value("difficulty", level);
  for (const auto& p : field<json>(doc, "problems", source)) {
    out.push_back(parse_problem(p, level, difficulty, source));
  }
}

}  // namespace

ProblemBank load_bank(const std::filesystem::path& path) {
  std::vector<Problem> problems;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(Errc::BankFormat, "no .json documents in " + path.string());
    for (const auto& f : files) load_document(f, problems);
  } else {
    load_document(path, problems);
  }
  std::vector<std::string> ids;
  for (const auto& p : problems) ids.push_back(p.id);
  std::sort(ids.begin(), ids.end());
  if (auto dup = std::adjacent_find(ids.begin(), ids.end()); dup != ids.end()) {
    throw Error(Errc::BankFormat, "duplicate problem id " + *dup);
  }
  return ProblemBank(std::move(problems));
}

std::vector<BankIssue> validate_bank(const ProblemBank& bank) {
  std::vector<BankIssue> out;
  for (const auto& p : bank.problems()) {
    if (auto issue = check_problem(p)) out.push_back({p.id, *issue});
  }
  return out;
}

}  // namespace scaffold::logic
