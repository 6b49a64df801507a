#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "corrnet/date.hpp"
#include "corrnet/timeseries.hpp"

namespace corrnet {

/// Factor-model market: r_i(t) = daily_vol * (b_m f_m(t) + s_i b_s f_g(i)(t)
/// + noise eps_i(t)), with iid standard normal factors and noise.
struct SynthSpec {
  std::size_t n_stocks = 80;
  /// Number of returns T; the panel has T+1 prices.
  std::size_t n_obs = 2000;
  std::size_t n_sectors = 4;
  double market_beta = 0.6;
  double sector_beta = 0.5;
  /// Optional per-sector loading; overrides sector_beta when non-empty.
  std::vector<double> sector_betas;
  /// Sector pairs (p, q): q's members load on p's factor with sign -1.
  std::vector<std::pair<std::size_t, std::size_t>> anti_pairs;
  double noise_sigma = 1.0;
  double daily_vol = 0.01;
  std::uint64_t seed = 1;
  Date start{2000, 1, 3};

  double beta_of(std::size_t sector) const {
    return sector_betas.empty() ? sector_beta : sector_betas[sector];
  }
};

/// Throws PreconditionError on invalid sizes, scales or anti pairs.
void validate(const SynthSpec& spec);

struct SynthMarket {
  PricePanel prices;
  /// Planted sector per stock (contiguous, balanced blocks).
  std::vector<std::size_t> sectors;
  /// Factor group per stock: anti-paired sectors share one group.
  std::vector<std::size_t> factor_groups;
  /// Loading sign s_i.
  std::vector<int> sides;
};

SynthMarket generate(const SynthSpec& spec);

/// Concatenates regimes over the same tickers (same n_stocks). Prices chain
/// continuously; labels come from the first regime. `regime_sectors` holds
/// each regime's planted sectors.
struct PiecewiseMarket {
  SynthMarket market;
  std::vector<std::vector<std::size_t>> regime_sectors;
  /// Price-date index from which each regime's returns begin.
  std::vector<std::size_t> regime_starts;
};
PiecewiseMarket generate_piecewise(const std::vector<SynthSpec>& regimes);

/// Closed-form correlations of the model for two stocks of given sectors.
struct ExpectedCorrelation {
  double within = 0.0;
  double cross = 0.0;
  double anti = 0.0;
};
ExpectedCorrelation expected_correlation(const SynthSpec& spec);

/// Rows (ticker, sector, side).
void write_labels(std::ostream& out, const SynthMarket& m);

/// Balanced contiguous sector of stock i.
std::size_t planted_sector(std::size_t i, std::size_t n_stocks, std::size_t n_sectors);

}  // namespace corrnet
