#include "corrnet/synth.hpp"

#include <cmath>
#include <string>
#include <ostream>
#include <random>

#include "corrnet/error.hpp"

namespace corrnet {

namespace {

std::string ticker_name(std::size_t i, std::size_t n) {
  int width = 1;
  for (std::size_t x = n > 0 ? n - 1 : 0; x >= 10; x /= 10) ++width;
  width = std::max(width, 3);
  auto digits = std::to_string(i);
  if (digits.size() < static_cast<std::size_t>(width)) digits.insert(0, width - digits.size(), '0');
  return "S" + digits;
}

std::vector<Date> weekdays(Date start, std::size_t count) {
  std::vector<Date> out;
  Date d = start;
  while (out.size() < count) {
    if (d.is_weekday()) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

}  // namespace

std::size_t planted_sector(std::size_t i, std::size_t n_stocks, std::size_t n_sectors) {
  return i * n_sectors / n_stocks;
}

void validate(const SynthSpec& s) {
  if (s.n_stocks < 2) throw PreconditionError("synth needs at least 2 stocks");
  if (s.n_obs < 2) throw PreconditionError("synth needs at least 2 returns");
  if (s.n_sectors < 1 || s.n_sectors > s.n_stocks) throw PreconditionError("sector count must lie in [1, N]");
  if (s.market_beta < 0 || s.sector_beta < 0 || s.noise_sigma < 0 || !(s.daily_vol > 0))
    throw PreconditionError("synth scales must be non-negative (daily_vol positive)");
  if (!s.sector_betas.empty()) {
    if (s.sector_betas.size() != s.n_sectors) throw PreconditionError("sector_betas needs one value per sector");
    for (double b : s.sector_betas)
      if (b < 0) throw PreconditionError("sector betas must be non-negative");
  }
  double total = s.market_beta * s.market_beta + s.noise_sigma * s.noise_sigma;
  for (std::size_t g = 0; g < s.n_sectors; ++g) total += s.beta_of(g) * s.beta_of(g);
  if (!(total > 0)) throw PreconditionError("synth model has zero variance");
  std::vector<int> used(s.n_sectors, 0);
  for (auto [p, q] : s.anti_pairs) {
    if (p >= s.n_sectors || q >= s.n_sectors || p == q) throw PreconditionError("invalid anti pair");
    if (used[p]++ || used[q]++) throw PreconditionError("a sector may appear in at most one anti pair");
  }
}

SynthMarket generate(const SynthSpec& spec) {
  validate(spec);
  const std::size_t n = spec.n_stocks;
  const std::size_t k = spec.n_sectors;
  SynthMarket m;
  m.sectors.resize(n);
  m.factor_groups.resize(n);
  m.sides.assign(n, 1);
  std::vector<std::size_t> group_of_sector(k);
  std::vector<int> sign_of_sector(k, 1);
  for (std::size_t g = 0; g < k; ++g) group_of_sector[g] = g;
  for (auto [p, q] : spec.anti_pairs) {
    group_of_sector[q] = p;
    sign_of_sector[q] = -1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    m.sectors[i] = planted_sector(i, n, k);
    m.factor_groups[i] = group_of_sector[m.sectors[i]];
    m.sides[i] = sign_of_sector[m.sectors[i]];
  }

  auto& p = m.prices;
  for (std::size_t i = 0; i < n; ++i) {
    p.tickers.push_back(ticker_name(i, n));
    p.market_tags.emplace_back();
  }
  p.dates = weekdays(spec.start, spec.n_obs + 1);
  p.prices = Matrix(n, spec.n_obs + 1);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> log_price(n, std::log(100.0));
  std::vector<double> factor(k);
  for (std::size_t i = 0; i < n; ++i) p.prices(i, 0) = 100.0;
  for (std::size_t t = 1; t <= spec.n_obs; ++t) {
    const double fm = normal(rng);
    for (auto& f : factor) f = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double eps = normal(rng);
      const double beta = spec.beta_of(m.sectors[i]);
      const double r = spec.market_beta * fm + m.sides[i] * beta * factor[m.factor_groups[i]] + spec.noise_sigma * eps;
      log_price[i] += spec.daily_vol * r;
      p.prices(i, t) = std::exp(log_price[i]);
    }
  }
  return m;
}

PiecewiseMarket generate_piecewise(const std::vector<SynthSpec>& regimes) {
  if (regimes.empty()) throw PreconditionError("piecewise market needs at least one regime");
  PiecewiseMarket out;
  out.market = generate(regimes.front());
  out.regime_sectors.push_back(out.market.sectors);
  out.regime_starts.push_back(0);
  auto& panel = out.market.prices;
  for (std::size_t r = 1; r < regimes.size(); ++r) {
    if (regimes[r].n_stocks != regimes.front().n_stocks) throw PreconditionError("regimes must share the stock count");
    SynthSpec spec = regimes[r];
    spec.start = panel.dates.back();
    auto next = generate(spec);
    out.regime_sectors.push_back(next.sectors);
    out.regime_starts.push_back(panel.n_dates() - 1);
    const std::size_t old_cols = panel.n_dates();
    const std::size_t add = next.prices.n_dates() - 1;
    Matrix merged(panel.n_tickers(), old_cols + add);
    for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
      for (std::size_t t = 0; t < old_cols; ++t) merged(i, t) = panel.prices(i, t);
      const double scale = panel.prices(i, old_cols - 1) / next.prices.prices(i, 0);
      for (std::size_t t = 1; t <= add; ++t) merged(i, old_cols - 1 + t) = next.prices.prices(i, t) * scale;
    }
    // The next regime starts on the last date so far; its first price only anchors the chain.
    for (std::size_t t = 1; t <= add; ++t) panel.dates.push_back(next.prices.dates[t]);
    panel.prices = std::move(merged);
  }
  return out;
}

ExpectedCorrelation expected_correlation(const SynthSpec& s) {
  const double bm2 = s.market_beta * s.market_beta;
  const double bs2 = s.sector_beta * s.sector_beta;
  const double total = bm2 + bs2 + s.noise_sigma * s.noise_sigma;
  return ExpectedCorrelation{(bm2 + bs2) / total, bm2 / total, (bm2 - bs2) / total};
}

void write_labels(std::ostream& out, const SynthMarket& m) {
  out << "ticker,sector,side\n";
  for (std::size_t i = 0; i < m.sectors.size(); ++i)
    out << m.prices.tickers[i] << "," << m.sectors[i] << "," << (m.sides[i] > 0 ? "+" : "-") << "\n";
}

}  // namespace corrnet
