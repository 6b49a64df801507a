#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"

#include "corrnet/correlation.hpp"
#include "corrnet/error.hpp"
#include "corrnet/rmt.hpp"
#include "corrnet/synth.hpp"
#include "corrnet/timeseries.hpp"
#include "pearson.hpp"
#include "support.hpp"

using namespace corrnet;

namespace {

ReturnPanel panel_from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix raw(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t t = 0; t < rows[i].size(); ++t) raw(i, t) = rows[i][t];
  return normalize(support::tickers(rows.size()), {}, raw);
}

std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t t, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> rows(n, std::vector<double>(t));
  std::vector<double> common(t);
  for (auto& x : common) x = g(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < t; ++k) rows[i][k] = 0.4 * static_cast<double>(i % 3) * common[k] + g(rng);
  return rows;
}

}  // namespace

TEST_CASE("duplicated and negated rows") {
  std::mt19937_64 rng(5);
  auto rows = random_rows(2, 50, rng);
  rows.push_back(rows[0]);
  rows.push_back(rows[0]);
  for (auto& x : rows[3]) x = -x;
  auto c = correlation_matrix(panel_from_rows(rows));
  CHECK(c(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(c(0, 3) == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("independent coin flips are nearly uncorrelated") {
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> rows(2, std::vector<double>(10000));
  for (auto& r : rows)
    for (auto& x : r) x = coin(rng) ? 1.0 : -1.0;
  auto c = correlation_matrix(panel_from_rows(rows));
  CHECK(std::abs(c(0, 1)) < 0.05);
  CHECK(c(0, 1) == doctest::Approx(oracle::pearson(rows[0], rows[1])).epsilon(1e-12));
}

TEST_CASE("matches textbook Pearson correlation") {
  std::mt19937_64 rng(8);
  auto rows = random_rows(7, 120, rng);
  auto c = correlation_matrix(panel_from_rows(rows));
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(std::abs(c(i, j) - oracle::pearson(rows[i], rows[j])) < 1e-12);
}

TEST_CASE("full matrix invariants: symmetry, unit diagonal, bounds, trace, PSD") {
  std::mt19937_64 rng(9);
  auto c = correlation_matrix(panel_from_rows(random_rows(12, 40, rng)));
  CHECK(c.kind == MatrixKind::full);
  double trace = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    trace += c(i, i);
    CHECK(c(i, i) == 1.0);
    for (std::size_t j = 0; j < 12; ++j) {
      CHECK(c(i, j) == c(j, i));
      CHECK(std::abs(c(i, j)) <= 1.0);
    }
  }
  CHECK(std::abs(trace - 12.0) < 1e-10);
  auto eig = jacobi_eigen(c.values);
  CHECK(eig.values.back() > -1e-8);
  // T < N gives a singular but still PSD matrix.
  auto wide = correlation_matrix(panel_from_rows(random_rows(12, 5, rng)));
  CHECK(jacobi_eigen(wide.values).values.back() > -1e-8);
}

TEST_CASE("permuting tickers permutes the matrix") {
  std::mt19937_64 rng(10);
  auto rows = random_rows(6, 30, rng);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<std::vector<double>> permuted;
  for (auto p : perm) permuted.push_back(rows[p]);
  auto c = correlation_matrix(panel_from_rows(rows));
  auto d = correlation_matrix(panel_from_rows(permuted));
  auto pc = permute(c, perm);
  for (std::size_t a = 0; a < 6; ++a)
    for (std::size_t b = 0; b < 6; ++b) CHECK(std::abs(pc(a, b) - d(a, b)) < 1e-14);
  CHECK(pc.tickers[0] == c.tickers[3]);
  CHECK_THROWS_AS(permute(c, {0, 0, 1, 2, 3, 4}), PreconditionError);
}

TEST_CASE("preconditions") {
  CHECK_THROWS_AS(correlation_matrix(panel_from_rows({{1, 2, 3}})), PreconditionError);
  auto c = support::matrix_of({{1, 0.3}, {0.3, 1}});
  CHECK_THROWS_AS(element_histogram(c, 0), PreconditionError);
  Matrix m(2, 2);
  m(0, 1) = 0.5;
  CHECK_THROWS_AS(require_symmetric(m), PreconditionError);
}

TEST_CASE("histogram of a single element") {
  auto h = element_histogram(support::matrix_of({{1, 0.3}, {0.3, 1}}), 10);
  REQUIRE(h.density.size() == 1);
  CHECK(h.edges.front() == 0.3);
  CHECK(h.edges.back() == 0.3);
  CHECK(h.density[0] == 1.0);
}

TEST_CASE("histogram density integrates to one and counts each pair once") {
  std::mt19937_64 rng(12);
  auto c = support::random_symmetric(30, rng);
  auto h = element_histogram(c, 17);
  REQUIRE(h.edges.size() == 18);
  double mass = 0;
  for (std::size_t b = 0; b < 17; ++b) mass += h.density[b] * (h.edges[b + 1] - h.edges[b]);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
  // Independent count of the upper triangle, max included in the last bin.
  double lo = 2, hi = -2;
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = i + 1; j < 30; ++j) {
      lo = std::min(lo, c(i, j));
      hi = std::max(hi, c(i, j));
    }
  std::vector<double> counts(17, 0);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = i + 1; j < 30; ++j)
      counts[std::min<std::size_t>(16, static_cast<std::size_t>((c(i, j) - lo) / (hi - lo) * 17))] += 1;
  for (std::size_t b = 0; b < 17; ++b)
    CHECK(h.density[b] == doctest::Approx(counts[b] / 435.0 / ((hi - lo) / 17)).epsilon(1e-9));
  CHECK(h.centers().size() == 17);
}

TEST_CASE("noise panel histogram peaks near zero") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0, 1);
  std::vector<std::vector<double>> rows(40, std::vector<double>(800));
  for (auto& r : rows)
    for (auto& x : r) x = g(rng);
  auto h = element_histogram(correlation_matrix(panel_from_rows(rows)), 21);
  auto centers = h.centers();
  auto peak = std::max_element(h.density.begin(), h.density.end()) - h.density.begin();
  CHECK(std::abs(centers[static_cast<std::size_t>(peak)]) < 0.02);
}

TEST_CASE("market mode of a one-factor market peaks near the expected correlation") {
  SynthSpec spec;
  spec.n_stocks = 40;
  spec.n_obs = 3000;
  spec.n_sectors = 1;
  spec.sector_beta = 0.0;
  spec.market_beta = 0.8;
  spec.seed = 4;
  auto m = generate(spec);
  auto r = compute_returns(m.prices);
  auto c = correlation_matrix(r.panel);
  auto es = eigendecompose(c, r.panel.n_obs());
  ModeSpec ms;
  ms.market = 0;
  ms.sector = {1, 1};
  ms.random = {2, 39};
  auto market = mode_matrix(es, ms, Mode::market);
  auto h = element_histogram(market, 15);
  auto centers = h.centers();
  auto peak = static_cast<std::size_t>(std::max_element(h.density.begin(), h.density.end()) - h.density.begin());
  const double width = h.edges[1] - h.edges[0];
  CHECK(std::abs(centers[peak] - expected_correlation(spec).cross) < std::max(0.03, 1.5 * width));
}

TEST_CASE("mean off-diagonal") {
  CHECK(mean_offdiag(support::matrix_of({{1, 0.4}, {0.4, 1}})) == doctest::Approx(0.4));
  auto c = support::matrix_of({{1, 0.1, 0.2}, {0.1, 1, 0.6}, {0.2, 0.6, 1}});
  CHECK(mean_offdiag(c) == doctest::Approx(0.3));
}

TEST_CASE("matrix file round-trips bit for bit with its kind") {
  std::mt19937_64 rng(14);
  auto c = support::random_symmetric(9, rng, -1, 1, MatrixKind::abs_sector_mode);
  std::ostringstream out;
  write_matrix(out, c);
  CHECK(out.str().rfind("# kind: abs-sector-mode", 0) == 0);
  std::istringstream in(out.str());
  auto back = read_matrix(in);
  CHECK(back.kind == c.kind);
  CHECK(back.tickers == c.tickers);
  CHECK(back.values == c.values);
}

TEST_CASE("kind names round-trip") {
  for (auto k : {MatrixKind::full, MatrixKind::market_mode, MatrixKind::sector_mode, MatrixKind::random_mode,
                 MatrixKind::residual_mode, MatrixKind::abs_sector_mode, MatrixKind::clipped_sector_mode})
    CHECK(matrix_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(matrix_kind_from_string("bogus"));
}

TEST_CASE("histogram writer lists edges and bin centers") {
  auto h = element_histogram(support::matrix_of({{1, 0.1, 0.5}, {0.1, 1, 0.3}, {0.5, 0.3, 1}}), 2);
  std::ostringstream out;
  write_histogram(out, h);
  CHECK(out.str().find("# edges:") != std::string::npos);
  CHECK(out.str().find("bin_center,density") != std::string::npos);
}
