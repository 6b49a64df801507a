// Serial vs OpenMP timings for the three kernels at a realistic size
// (260 stocks, ~17 years of daily returns).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <vector>

#include <omp.h>

#include "corrnet/kernels.hpp"

using namespace corrnet;

namespace {

template <class F>
double best_ms(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool same) {
  std::printf("%-14s serial %9.2f ms   omp %9.2f ms   speedup %5.2fx   %s\n", name, serial, parallel,
              serial / parallel, same ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  const std::size_t n = 260, t = 4286;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;

  Matrix x(n, t);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < t; ++k) x(i, k) = normal(rng);

  Matrix gs, gp;
  const double g1 = best_ms(3, [&] { gs = kernels::serial::gram(x); });
  const double g2 = best_ms(3, [&] { gp = kernels::omp::gram(x); });
  row("gram", g1, g2, std::equal(gs.data().begin(), gs.data().end(), gp.data().begin()));

  Matrix vecs(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) vecs(i, k) = normal(rng);
  std::vector<double> w(n, 1.0);
  std::vector<std::size_t> modes(n - 1);
  std::iota(modes.begin(), modes.end(), 1);
  Matrix ms, mp;
  const double m1 = best_ms(3, [&] { ms = kernels::serial::mode_sum(vecs, w, modes); });
  const double m2 = best_ms(3, [&] { mp = kernels::omp::mode_sum(vecs, w, modes); });
  row("mode_sum", m1, m2, std::equal(ms.data().begin(), ms.data().end(), mp.data().begin()));

  std::vector<std::pair<double, kernels::NodePair>> scored;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) scored.push_back({std::abs(gs(i, j)), {i, j}});
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<kernels::NodePair> ranked;
  for (const auto& s : scored) ranked.push_back(s.second);
  kernels::PlanarScreen ps, pp;
  const double p1 = best_ms(1, [&] { ps = kernels::serial::planar_screen(n, ranked, 3 * n - 6); });
  const double p2 = best_ms(1, [&] { pp = kernels::omp::planar_screen(n, ranked, 3 * n - 6); });
  row("planar_screen", p1, p2, ps.accepted == pp.accepted && ps.rejected == pp.rejected);
  return 0;
}
