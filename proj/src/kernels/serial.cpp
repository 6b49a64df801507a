#include "common.hpp"
#include "corrnet/error.hpp"
#include "corrnet/kernels.hpp"
#include "corrnet/planarity.hpp"

namespace corrnet::kernels::serial {

Matrix gram(const Matrix& x) {
  if (x.cols() == 0) throw PreconditionError("gram: empty time axis");
  const std::size_t n = x.rows();
  Matrix g(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) g(i, j) = detail::dot_mean(x.row(i), x.row(j));
  detail::mirror_upper(g);
  return g;
}

Matrix mode_sum(const Matrix& vectors, std::span<const double> weights, std::span<const std::size_t> modes) {
  const std::size_t n = vectors.cols();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) m(i, j) = detail::mode_entry(vectors, weights, modes, i, j);
  detail::mirror_upper(m);
  return m;
}

PlanarScreen planar_screen(std::size_t n_nodes, std::span<const NodePair> ranked, std::size_t target) {
  PlanarScreen out;
  std::vector<NodePair> kept;
  kept.reserve(target);
  for (std::size_t k = 0; k < ranked.size() && kept.size() < target; ++k) {
    if (planar_with(n_nodes, kept, ranked[k])) {
      kept.push_back(ranked[k]);
      out.accepted.push_back(k);
    } else {
      out.rejected.push_back(k);
    }
  }
  return out;
}

}  // namespace corrnet::kernels::serial
