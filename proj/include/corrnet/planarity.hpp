#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace corrnet {

using NodePair = std::pair<std::size_t, std::size_t>;

/// Combinatorial embedding: for every node, its neighbours in clockwise order.
struct Embedding {
  std::vector<std::vector<std::size_t>> rotation;
};

struct PlanarityResult {
  bool planar = false;
  /// Rotation system witnessing planarity (empty when non-planar).
  Embedding embedding;
  /// Edges of a Kuratowski subdivision (only when requested and non-planar).
  std::vector<NodePair> obstruction;
};

/// Exact planarity test (left-right criterion). Self-loops and repeated
/// edges are ignored.
PlanarityResult is_planar(std::size_t n_nodes, std::span<const NodePair> edges, bool want_obstruction = false);

/// Boolean-only variant; skips building the embedding.
bool planar(std::size_t n_nodes, std::span<const NodePair> edges);

/// Same as planar() on `edges` plus one extra edge, without copying.
bool planar_with(std::size_t n_nodes, std::span<const NodePair> edges, NodePair extra);

/// Minimal non-planar subgraph (a subdivision of K5 or K3,3), found by
/// deleting every edge whose removal keeps the graph non-planar.
/// Empty if the graph is planar.
std::vector<NodePair> kuratowski_obstruction(std::size_t n_nodes, std::span<const NodePair> edges);

/// Checks a rotation system against the edge set and Euler's formula
/// V - E + F = 2 per connected component (faces traced from the rotation).
bool verify_embedding(std::size_t n_nodes, std::span<const NodePair> edges, const Embedding& embedding);

}  // namespace corrnet
