#include "scaffold/logic/proof.hpp"

#include <algorithm>
#include <unordered_map>

#include "scaffold/error.hpp"

namespace scaffold::logic {

const ProofNode* ProofGraph::find(const std::string& id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ProofNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

ProofNode* ProofGraph::find(const std::string& id) {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ProofNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

const ProofNode& ProofGraph::at(const std::string& id) const {
  const ProofNode* n = find(id);
  if (n == nullptr) throw Error(Errc::DanglingParent, "no node with id '" + id + "'");
  return *n;
}

ProofNode& ProofGraph::at(const std::string& id) {
  ProofNode* n = find(id);
  if (n == nullptr) throw Error(Errc::DanglingParent, "no node with id '" + id + "'");
  return *n;
}

std::size_t ProofGraph::derived_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const ProofNode& n) {
    return n.justification.kind != JustificationKind::Given;
  }));
}

namespace {

enum class Mark : std::uint8_t { White, Grey, Black };

void visit(std::size_t i, const std::vector<std::vector<std::size_t>>& parents,
           std::vector<Mark>& marks, const ProofGraph& g) {
  marks[i] = Mark::Grey;
  for (std::size_t p : parents[i]) {
    if (marks[p] == Mark::Grey) {
      throw Error(Errc::CycleDetected, "justification cycle through node '" + g.nodes[p].id + "'");
    }
    if (marks[p] == Mark::White) visit(p, parents, marks, g);
  }
  marks[i] = Mark::Black;
}

}  // namespace

ValidationResult validate_proof(const ProofGraph& graph, const std::optional<Formula>& expected) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (!index.emplace(graph.nodes[i].id, i).second) {
      throw Error(Errc::InvalidArgument, "duplicate node id '" + graph.nodes[i].id + "'");
    }
  }
  if (!index.contains(graph.conclusion_id)) {
    throw Error(Errc::DanglingParent, "conclusion id '" + graph.conclusion_id + "' is not a node");
  }

  std::vector<std::vector<std::size_t>> parents(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const auto& pid : graph.nodes[i].justification.parents) {
      auto it = index.find(pid);
      if (it == index.end()) {
        throw Error(Errc::DanglingParent,
                    "node '" + graph.nodes[i].id + "' references absent parent '" + pid + "'");
      }
      parents[i].push_back(it->second);
    }
  }
  std::vector<Mark> marks(graph.nodes.size(), Mark::White);
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (marks[i] == Mark::White) visit(i, parents, marks, graph);
  }

  auto fail = [](const ProofNode& n, std::string reason) {
    return ValidationResult{false, n.id, std::move(reason)};
  };

  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const ProofNode& n = graph.nodes[i];
    const Justification& j = n.justification;
    switch (j.kind) {
      case JustificationKind::Given:
        break;
      case JustificationKind::Missing:
        return fail(n, "justification missing");
      case JustificationKind::Derived: {
        if (!j.rule) return fail(n, "derived node has no rule");
        std::vector<Formula> premises;
        premises.reserve(parents[i].size());
        for (std::size_t p : parents[i]) premises.push_back(graph.nodes[p].formula);
        bool ok = false;
        try {
          ok = check_rule_application(*j.rule, premises, n.formula);
        } catch (const Error& e) {
          if (e.code() != Errc::ArityMismatch) throw;
          return fail(n, e.what());
        }
        if (!ok) {
          return fail(n, std::string(to_string(*j.rule)) + " does not derive " + render(n.formula));
        }
        break;
      }
    }
    if (n.id == graph.conclusion_id && expected && !(n.formula == *expected)) {
      return fail(n, "conclusion is " + render(n.formula) + ", expected " + render(*expected));
    }
  }
  return {};
}

std::set<RuleId> rules_used(const ProofGraph& graph) {
  std::set<RuleId> out;
  for (const auto& n : graph.nodes) {
    if (n.is_derived() && n.justification.rule) out.insert(*n.justification.rule);
  }
  return out;
}

std::optional<std::string> check_problem(const Problem& p) {
  const ProofGraph& g = p.reference_solution;
  std::vector<Formula> given_formulas;
  for (const auto& n : g.nodes) {
    if (n.is_given()) given_formulas.push_back(n.formula);
  }
  if (given_formulas.size() != p.givens.size() ||
      !std::equal(given_formulas.begin(), given_formulas.end(), p.givens.begin())) {
    return "given nodes do not match the problem's givens";
  }
  if (g.find(g.conclusion_id) == nullptr) return "conclusion node absent";
  if (rules_used(g) != p.required_rules) return "requiredRules differ from the rules in the solution";
  try {
    auto result = validate_proof(g, p.conclusion);
    if (!result.valid) return "reference solution invalid at node " + *result.first_error + ": " + result.reason;
  } catch (const Error& e) {
    return e.what();
  }
  return std::nullopt;
}

}  // namespace scaffold::logic
