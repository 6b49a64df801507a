#pragma once

// Data-parallel kernels. Each has a serial reference and an OpenMP twin that
// must agree bitwise: every output element is produced by one thread with a
// fixed summation order.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "corrnet/matrix.hpp"

namespace corrnet::kernels {

using NodePair = std::pair<std::size_t, std::size_t>;

/// Outcome of greedy planar insertion over a ranked pair list: indices into
/// the ranked list, in ranking order.
struct PlanarScreen {
  std::vector<std::size_t> accepted;
  std::vector<std::size_t> rejected;
};

namespace serial {

/// G_ij = (1/T) sum_t x_i(t) x_j(t) for the rows of `x`.
Matrix gram(const Matrix& x);

/// M_ij = sum_{a in modes} w_a v_a(i) v_a(j); rows of `vectors` are the v_a.
Matrix mode_sum(const Matrix& vectors, std::span<const double> weights, std::span<const std::size_t> modes);

/// Walks `ranked` in order, keeping a pair iff the graph stays planar, until
/// `target` pairs are kept.
PlanarScreen planar_screen(std::size_t n_nodes, std::span<const NodePair> ranked, std::size_t target);

}  // namespace serial

namespace omp {

Matrix gram(const Matrix& x);
Matrix mode_sum(const Matrix& vectors, std::span<const double> weights, std::span<const std::size_t> modes);

/// Speculative batches: candidates are tested in parallel against the current
/// graph. A rejection stays valid after later insertions (non-planarity is
/// monotone), so only candidates tested planar after an acceptance are retried.
PlanarScreen planar_screen(std::size_t n_nodes, std::span<const NodePair> ranked, std::size_t target,
                           std::size_t batch = 0);

}  // namespace omp

}  // namespace corrnet::kernels
