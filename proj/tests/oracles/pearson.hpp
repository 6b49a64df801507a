#pragma once

// Textbook Pearson correlation from raw series.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t t = x.size();
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < t; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= t;
  my /= t;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < t; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
