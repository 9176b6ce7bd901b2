#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "coopest/partition.hpp"

namespace coopest {

/// Directed communication graph; edge (j, k) means estimator j transmits to k.
class CommGraph {
 public:
  CommGraph() = default;
  /// Throws Error(Validation) on self-loops or unknown vertices.
  CommGraph(int vertices, const std::vector<std::pair<int, int>>& edges);

  int vertices() const { return vertices_; }
  const std::set<std::pair<int, int>>& edges() const { return edges_; }
  bool has_edge(int from, int to) const { return edges_.count({from, to}) > 0; }
  /// N_k, ascending.
  std::vector<int> neighbors(int k) const;

 private:
  int vertices_ = 0;
  std::set<std::pair<int, int>> edges_;
};

/// Vertex k_l of the extended graph: the copy of x_l held by estimator k.
struct EstimatorVertex {
  int estimator = 0;
  StateIndex state;

  auto operator<=>(const EstimatorVertex&) const = default;
};

std::string to_string(const EstimatorVertex& v);

enum class EdgeKind { Interconnection, Fusion };

struct ExtendedEdge {
  EstimatorVertex tail;
  EstimatorVertex head;
  EdgeKind kind = EdgeKind::Interconnection;

  bool operator==(const ExtendedEdge&) const = default;
};

/// Edges keep the insertion order of the construction loops and may repeat
/// (one per coupling term); out_degree counts multiplicity.
struct ExtendedGraph {
  std::vector<EstimatorVertex> vertices;
  std::vector<ExtendedEdge> edges;
  std::map<EstimatorVertex, int> out_degree;

  int q(const EstimatorVertex& v) const;
};

struct MissingEdge {
  int estimator = 0;              // k
  StateIndex component;           // l in I^(k)
  StateIndex external;            // l* outside I^(k) with A[l, l*] != 0
  std::optional<int> required_from;  // zeta(l*); empty when nobody estimates l*
};

struct Assumption2Report {
  std::vector<MissingEdge> violations;
  bool passed() const { return violations.empty(); }
  /// Distinct (from, to) edges that would repair the violations.
  std::set<std::pair<int, int>> required_edges() const;
};

Assumption2Report check_assumption2(const InterconnectedSystem& sys,
                                    const std::vector<SelectionFunction>& selections,
                                    const AssignmentFunction& zeta, const CommGraph& graph);

/// Interconnection part: for every k, every l* in I_c^(k) and every selected l
/// with A[l, l*] != 0, an edge (zeta(l*), l*) -> (k, l). Fusion part: for
/// every neighbor j of k and every shared l, an edge (j, l) -> (k, l).
/// Throws Error(Precondition) if some coupled estimate has no delivering edge.
ExtendedGraph build_extended_graph(const InterconnectedSystem& sys,
                                   const std::vector<SelectionFunction>& selections,
                                   const AssignmentFunction& zeta, const CommGraph& graph);

std::string export_dot(const CommGraph& graph);
std::string export_dot(const ExtendedGraph& graph);

}  // namespace coopest
