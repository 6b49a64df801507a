#include <cmath>
#include <sstream>

#include "doctest.h"

#include "corrnet/community.hpp"
#include "corrnet/correlation.hpp"
#include "corrnet/error.hpp"
#include "corrnet/filtergraph.hpp"
#include "corrnet/rmt.hpp"
#include "corrnet/synth.hpp"
#include "corrnet/timeseries.hpp"

using namespace corrnet;

namespace {

struct Pooled {
  double within = 0, cross = 0, anti = 0;
};

Pooled pooled(const SynthMarket& m, const CorrelationMatrix& c, const SynthSpec& spec) {
  double w = 0, x = 0, a = 0;
  std::size_t nw = 0, nx = 0, na = 0;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      if (m.factor_groups[i] == m.factor_groups[j] && spec.beta_of(m.sectors[i]) > 0) {
        if (m.sides[i] == m.sides[j]) w += c(i, j), ++nw;
        else a += c(i, j), ++na;
      } else if (m.factor_groups[i] != m.factor_groups[j]) {
        x += c(i, j), ++nx;
      }
    }
  return {nw ? w / nw : NAN, nx ? x / nx : NAN, na ? a / na : NAN};
}

CorrelationMatrix correlate(const SynthMarket& m) { return correlation_matrix(compute_returns(m.prices).panel); }

}  // namespace

TEST_CASE("same spec and seed give identical panels") {
  SynthSpec spec;
  spec.n_stocks = 20;
  spec.n_obs = 300;
  auto a = generate(spec);
  auto b = generate(spec);
  CHECK(a.prices.prices == b.prices.prices);
  CHECK(a.prices.dates == b.prices.dates);
  CHECK(a.prices.tickers == b.prices.tickers);
  spec.seed = 2;
  CHECK(generate(spec).prices.prices != a.prices.prices);
}

TEST_CASE("panel shape, base price and balanced sectors") {
  SynthSpec spec;
  spec.n_stocks = 10;
  spec.n_obs = 50;
  spec.n_sectors = 3;
  auto m = generate(spec);
  CHECK(m.prices.n_tickers() == 10);
  CHECK(m.prices.n_dates() == 51);
  for (std::size_t i = 0; i < 10; ++i) CHECK(m.prices.prices(i, 0) == 100.0);
  std::vector<int> counts(3, 0);
  for (auto s : m.sectors) ++counts[s];
  CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
  for (std::size_t i = 0; i < 10; ++i) CHECK(planted_sector(i, 10, 3) == m.sectors[i]);
  // Returns come back through the ingestion path: log ratios of the prices.
  auto r = log_returns(m.prices, 1);
  CHECK(r.cols() == 50);
}

TEST_CASE("invalid specs are refused") {
  SynthSpec s;
  s.n_stocks = 1;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s = {};
  s.n_sectors = 0;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s = {};
  s.market_beta = -0.1;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s = {};
  s.market_beta = s.sector_beta = s.noise_sigma = 0;
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s = {};
  s.anti_pairs = {{0, 7}};
  CHECK_THROWS_AS(validate(s), PreconditionError);
  s = {};
  s.sector_betas = {0.1, 0.2};
  CHECK_THROWS_AS(validate(s), PreconditionError);
}

TEST_CASE("closed-form expected correlations") {
  SynthSpec spec;
  spec.market_beta = 0.6;
  spec.sector_beta = 0.5;
  spec.noise_sigma = 1.0;
  auto e = expected_correlation(spec);
  CHECK(e.within == doctest::Approx(0.61 / 1.61));
  CHECK(e.cross == doctest::Approx(0.36 / 1.61));
  CHECK(e.anti == doctest::Approx(0.11 / 1.61));
  CHECK(std::abs(e.within - 0.379) < 5e-4);
  CHECK(std::abs(e.cross - 0.224) < 5e-4);
  spec.market_beta = 0;
  CHECK(expected_correlation(spec).cross == 0.0);
  spec.market_beta = 0.6;
  spec.noise_sigma = 1e6;
  auto tiny = expected_correlation(spec);
  CHECK(std::abs(tiny.within) < 1e-9);
  CHECK(std::abs(tiny.cross) < 1e-9);
  CHECK(std::abs(tiny.anti) < 1e-9);
}

TEST_CASE("empirical correlations converge to the closed form within 3/sqrt(T)") {
  for (std::uint64_t seed : {1, 2, 3}) {
    SynthSpec spec;
    spec.n_stocks = 40;
    spec.n_obs = 2500;
    spec.anti_pairs = {{2, 3}};
    spec.sector_beta = 0.8;
    spec.seed = seed;
    auto m = generate(spec);
    auto p = pooled(m, correlate(m), spec);
    auto e = expected_correlation(spec);
    const double tol = 3 / std::sqrt(2500.0);
    CHECK(std::abs(p.within - e.within) < tol);
    CHECK(std::abs(p.cross - e.cross) < tol);
    CHECK(std::abs(p.anti - e.anti) < tol);
    // beta_s^2 > beta_m^2, so the anti sides are negatively correlated.
    CHECK(e.anti < 0);
    CHECK(p.anti < 0);
  }
}

TEST_CASE("pure noise stays inside the Marchenko-Pastur bounds") {
  SynthSpec spec;
  spec.n_stocks = 100;
  spec.n_obs = 1000;
  spec.market_beta = 0;
  spec.sector_beta = 0;
  spec.seed = 101;
  auto m = generate(spec);
  auto es = eigendecompose(correlate(m), 1000);
  auto b = mp_bounds(100, 1000);
  std::size_t outside = 0;
  for (double v : es.eigenvalues) outside += v < b.lambda_min || v > b.lambda_max;
  CHECK(outside <= 2);
}

TEST_CASE("market only: one dominant eigenvalue and no sector structure") {
  SynthSpec spec;
  spec.n_stocks = 60;
  spec.n_obs = 2000;
  spec.sector_beta = 0;
  spec.seed = 102;
  auto es = eigendecompose(correlate(generate(spec)), 2000);
  auto b = mp_bounds(60, 2000);
  CHECK(es.eigenvalues[0] > 10 * b.lambda_max);
  CHECK(es.eigenvalues[1] < b.lambda_max * 1.1);
  CHECK_THROWS_AS(default_mode_spec(es, b), PreconditionError);
}

TEST_CASE("reference configuration recovers the planted sectors") {
  SynthSpec spec;
  spec.n_stocks = 80;
  spec.n_obs = 2000;
  spec.n_sectors = 4;
  spec.market_beta = 0.6;
  spec.sector_beta = 0.5;
  spec.noise_sigma = 1.0;
  spec.seed = 103;
  auto m = generate(spec);
  auto p = detect_communities(build_pmfg(correlate(m)));
  CHECK(adjusted_rand_index(p.membership, m.sectors) >= 0.9);
}

TEST_CASE("anti pairs share a factor group with opposite sides") {
  SynthSpec spec;
  spec.n_stocks = 16;
  spec.n_sectors = 4;
  spec.anti_pairs = {{1, 3}};
  spec.n_obs = 10;
  auto m = generate(spec);
  for (std::size_t i = 0; i < 16; ++i) {
    if (m.sectors[i] == 3) {
      CHECK(m.factor_groups[i] == 1);
      CHECK(m.sides[i] == -1);
    } else {
      CHECK(m.factor_groups[i] == m.sectors[i]);
      CHECK(m.sides[i] == 1);
    }
  }
}

TEST_CASE("piecewise regimes chain prices and keep labels") {
  SynthSpec a;
  a.n_stocks = 12;
  a.n_obs = 100;
  a.seed = 1;
  SynthSpec b = a;
  b.n_sectors = 2;
  b.n_obs = 50;
  b.seed = 2;
  auto pw = generate_piecewise({a, b});
  CHECK(pw.market.prices.n_dates() == 151);
  CHECK(pw.regime_starts == std::vector<std::size_t>{0, 100});
  CHECK(pw.regime_sectors.size() == 2);
  CHECK(pw.market.sectors == pw.regime_sectors[0]);
  auto alone = generate(a);
  for (std::size_t t = 0; t <= 100; ++t)
    for (std::size_t i = 0; i < 12; ++i) CHECK(pw.market.prices.prices(i, t) == alone.prices.prices(i, t));
  for (std::size_t k = 1; k < pw.market.prices.n_dates(); ++k) CHECK(pw.market.prices.dates[k - 1] < pw.market.prices.dates[k]);
  SynthSpec c = a;
  c.n_stocks = 13;
  CHECK_THROWS_AS(generate_piecewise({a, c}), PreconditionError);
}

TEST_CASE("labels file") {
  SynthSpec spec;
  spec.n_stocks = 4;
  spec.n_sectors = 2;
  spec.anti_pairs = {{0, 1}};
  spec.n_obs = 5;
  std::ostringstream out;
  write_labels(out, generate(spec));
  CHECK(out.str().find("ticker,sector,side") != std::string::npos);
  CHECK(out.str().find(",1,-") != std::string::npos);
}
