#include <omp.h>

#include <algorithm>

#include "common.hpp"
#include "corrnet/error.hpp"
#include "corrnet/kernels.hpp"
#include "corrnet/planarity.hpp"

namespace corrnet::kernels::omp {

Matrix gram(const Matrix& x) {
  if (x.cols() == 0) throw PreconditionError("gram: empty time axis");
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  Matrix g(x.rows(), x.rows());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = i; j < n; ++j) g(i, j) = detail::dot_mean(x.row(i), x.row(j));
  detail::mirror_upper(g);
  return g;
}

Matrix mode_sum(const Matrix& vectors, std::span<const double> weights, std::span<const std::size_t> modes) {
  const auto n = static_cast<std::ptrdiff_t>(vectors.cols());
  Matrix m(vectors.cols(), vectors.cols());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    for (std::ptrdiff_t j = i; j < n; ++j) m(i, j) = detail::mode_entry(vectors, weights, modes, i, j);
  detail::mirror_upper(m);
  return m;
}

PlanarScreen planar_screen(std::size_t n_nodes, std::span<const NodePair> ranked, std::size_t target,
                           std::size_t batch) {
  if (batch == 0) batch = 4 * static_cast<std::size_t>(omp_get_max_threads());
  PlanarScreen out;
  std::vector<NodePair> kept;
  kept.reserve(target);
  std::vector<char> ok;
  std::size_t next = 0;
  while (next < ranked.size() && kept.size() < target) {
    const std::size_t len = std::min(batch, ranked.size() - next);
    ok.assign(len, 0);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(len); ++b)
      ok[b] = planar_with(n_nodes, kept, ranked[next + b]) ? 1 : 0;

    // Commit in ranking order. The first planar candidate is accepted; later
    // planar verdicts were reached without it and must be retested.
    bool grew = false;
    std::size_t b = 0;
    for (; b < len && kept.size() < target; ++b) {
      if (!ok[b]) {
        out.rejected.push_back(next + b);
      } else if (!grew) {
        kept.push_back(ranked[next + b]);
        out.accepted.push_back(next + b);
        grew = true;
      } else {
        break;
      }
    }
    next += b;
  }
  return out;
}

}  // namespace corrnet::kernels::omp
