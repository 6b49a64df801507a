#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/planarity.hpp"

namespace corrnet {

struct GraphEdge {
  std::size_t i = 0;
  std::size_t j = 0;
  double weight = 0.0;
  /// Position of the pair in the descending ranking (0 = strongest).
  std::size_t rank = 0;
};

enum class GraphKind { mst, pmfg };

std::string to_string(GraphKind kind);
GraphKind graph_kind_from_string(const std::string& text);

struct FilteredGraph {
  std::vector<std::string> nodes;
  /// Sorted by rank; i < j for every edge.
  std::vector<GraphEdge> edges;
  GraphKind kind = GraphKind::mst;
  MatrixKind source = MatrixKind::full;
  int genus = 0;
  /// PMFG only: ranks of pairs refused because they broke planarity.
  std::vector<std::size_t> rejected_ranks;

  std::size_t n_nodes() const noexcept { return nodes.size(); }
  std::vector<NodePair> pairs() const;
};

/// All pairs i < j ordered by descending C_ij, exact ties by (i, j).
std::vector<NodePair> rank_pairs(const CorrelationMatrix& c);

/// Maximum spanning tree (Kruskal over the ranking).
FilteredGraph build_mst(const CorrelationMatrix& c);

enum class Execution { serial, parallel };

/// Greedy planar insertion over the ranking until 3N-6 edges. Signed
/// sector-mode input is refused: rank its absolute or clipped variant.
/// Throws Error if the MST is not contained in the result.
FilteredGraph build_pmfg(const CorrelationMatrix& c, Execution exec = Execution::parallel);

/// Market tag of a node label ("NYSE:IBM" -> "NYSE"; empty when untagged).
std::string market_tag(const std::string& node);

void write_edge_list(std::ostream& out, const FilteredGraph& g);
FilteredGraph read_edge_list(std::istream& in);
void write_graphml(std::ostream& out, const FilteredGraph& g);
void write_dot(std::ostream& out, const FilteredGraph& g);

}  // namespace corrnet
