#include "coopest/graphs.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace coopest {

CommGraph::CommGraph(int vertices, const std::vector<std::pair<int, int>>& edges)
    : vertices_(vertices) {
  for (const auto& [from, to] : edges) {
    if (from < 0 || from >= vertices || to < 0 || to >= vertices)
      throw Error(ErrorKind::Validation, "communication edge (" + std::to_string(from + 1) + "," +
                                             std::to_string(to + 1) + ") references unknown estimator");
    if (from == to)
      throw Error(ErrorKind::Validation, "communication edge (" + std::to_string(from + 1) + "," +
                                             std::to_string(to + 1) + ") is a self-loop");
    edges_.insert({from, to});
  }
}

std::vector<int> CommGraph::neighbors(int k) const {
  std::vector<int> out;
  for (const auto& [from, to] : edges_)
    if (to == k) out.push_back(from);
  std::sort(out.begin(), out.end());
  return out;
}

std::string to_string(const EstimatorVertex& v) {
  return std::to_string(v.estimator + 1) + "_" + to_string(v.state);
}

int ExtendedGraph::q(const EstimatorVertex& v) const {
  const auto it = out_degree.find(v);
  return it == out_degree.end() ? 0 : it->second;
}

std::set<std::pair<int, int>> Assumption2Report::required_edges() const {
  std::set<std::pair<int, int>> out;
  for (const auto& v : violations)
    if (v.required_from) out.insert({*v.required_from, v.estimator});
  return out;
}

namespace {

// Calls fn(k, l, l*) for every selected l of estimator k that is driven by an
// unselected l*, in the order the extended graph lists its coupling edges.
template <typename Fn>
void for_each_external_coupling(const InterconnectedSystem& sys,
                                const std::vector<SelectionFunction>& selections, Fn&& fn) {
  for (int k = 0; k < static_cast<int>(selections.size()); ++k) {
    const auto& sel = selections[k];
    for (const auto& ext : sys.index.entries()) {
      if (sel.contains(ext)) continue;
      const int col = sys.index.global(ext);
      for (const auto& l : sel.image()) {
        if (sys.A(sys.index.global(l), col) != 0.0) fn(k, l, ext);
      }
    }
  }
}

}  // namespace

Assumption2Report check_assumption2(const InterconnectedSystem& sys,
                                    const std::vector<SelectionFunction>& selections,
                                    const AssignmentFunction& zeta, const CommGraph& graph) {
  Assumption2Report report;
  for_each_external_coupling(sys, selections, [&](int k, const StateIndex& l, const StateIndex& ext) {
    const auto owner = zeta(ext);
    if (!owner || !graph.has_edge(*owner, k)) report.violations.push_back({k, l, ext, owner});
  });
  return report;
}

ExtendedGraph build_extended_graph(const InterconnectedSystem& sys,
                                   const std::vector<SelectionFunction>& selections,
                                   const AssignmentFunction& zeta, const CommGraph& graph) {
  const auto a2 = check_assumption2(sys, selections, zeta, graph);
  if (!a2.passed()) {
    const auto& v = a2.violations.front();
    throw Error(ErrorKind::Precondition,
                "cannot build extended graph: estimator " + std::to_string(v.estimator + 1) +
                    " needs the estimate of " + to_string(v.external) +
                    (v.required_from ? " from estimator " + std::to_string(*v.required_from + 1)
                                     : std::string(" but no estimator is assigned to it")));
  }

  ExtendedGraph g;
  for (const auto& sel : selections) {
    for (const auto& s : sel.image()) {
      g.vertices.push_back({sel.owner(), s});
      g.out_degree[{sel.owner(), s}] = 0;
    }
  }

  const int N = static_cast<int>(selections.size());
  for (int k = 0; k < N; ++k) {
    const auto& sel = selections[k];
    for (const auto& ext : sys.index.entries()) {
      if (sel.contains(ext)) continue;
      const int col = sys.index.global(ext);
      for (const auto& l : sel.image()) {
        if (sys.A(sys.index.global(l), col) == 0.0) continue;
        g.edges.push_back({{*zeta(ext), ext}, {k, l}, EdgeKind::Interconnection});
      }
    }
    for (int j : graph.neighbors(k)) {
      for (const auto& l : sel.image()) {
        if (selections[j].contains(l)) g.edges.push_back({{j, l}, {k, l}, EdgeKind::Fusion});
      }
    }
  }
  for (const auto& e : g.edges) ++g.out_degree[e.tail];
  return g;
}

namespace {

std::string vertex_id(const EstimatorVertex& v) {
  return "\"v" + std::to_string(v.estimator + 1) + "_" + std::to_string(v.state.subsystem + 1) +
         "_" + std::to_string(v.state.component + 1) + "\"";
}

}  // namespace

std::string export_dot(const CommGraph& graph) {
  std::ostringstream out;
  out << "digraph comm {\n";
  for (int k = 0; k < graph.vertices(); ++k) out << "  " << k + 1 << ";\n";
  for (const auto& [from, to] : graph.edges()) out << "  " << from + 1 << " -> " << to + 1 << ";\n";
  out << "}\n";
  return out.str();
}

std::string export_dot(const ExtendedGraph& graph) {
  std::ostringstream out;
  out << "digraph extended {\n";
  std::vector<EstimatorVertex> vertices = graph.vertices;
  std::sort(vertices.begin(), vertices.end());
  std::size_t i = 0;
  while (i < vertices.size()) {
    const int k = vertices[i].estimator;
    out << "  subgraph cluster_" << k + 1 << " {\n";
    out << "    label=\"estimator " << k + 1 << "\";\n";
    for (; i < vertices.size() && vertices[i].estimator == k; ++i) {
      const auto& s = vertices[i].state;
      out << "    " << vertex_id(vertices[i]) << " [label=\"" << k + 1 << "_(" << s.subsystem + 1
          << "," << s.component + 1 << ")\"];\n";
    }
    out << "  }\n";
  }
  std::vector<ExtendedEdge> edges = graph.edges;
  std::stable_sort(edges.begin(), edges.end(), [](const ExtendedEdge& a, const ExtendedEdge& b) {
    return std::tie(a.tail, a.head, a.kind) < std::tie(b.tail, b.head, b.kind);
  });
  for (const auto& e : edges) {
    out << "  " << vertex_id(e.tail) << " -> " << vertex_id(e.head);
    if (e.kind == EdgeKind::Fusion) out << " [style=dashed, color=blue]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace coopest
