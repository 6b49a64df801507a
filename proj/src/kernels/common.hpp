#pragma once

// Per-element bodies shared by the serial and OpenMP kernels, so both produce
// the same floating-point operations in the same order.

#include <cstddef>
#include <span>

#include "corrnet/matrix.hpp"

namespace corrnet::kernels::detail {

inline double dot_mean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
  return s / static_cast<double>(a.size());
}

inline double mode_entry(const Matrix& vectors, std::span<const double> weights, std::span<const std::size_t> modes,
                         std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t a : modes) s += weights[a] * vectors(a, i) * vectors(a, j);
  return s;
}

inline void mirror_upper(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
}

}  // namespace corrnet::kernels::detail
