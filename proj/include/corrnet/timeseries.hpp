#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "corrnet/date.hpp"
#include "corrnet/matrix.hpp"

namespace corrnet {

/// Aligned price panel: N tickers x (T+1) dates. NaN marks a missing cell
/// until fill_missing() has run.
struct PricePanel {
  std::vector<std::string> tickers;
  std::vector<Date> dates;
  Matrix prices;
  /// Market of origin per ticker; empty strings when untagged.
  std::vector<std::string> market_tags;

  std::size_t n_tickers() const noexcept { return tickers.size(); }
  std::size_t n_dates() const noexcept { return dates.size(); }
  std::size_t count_missing() const;
};

/// Normalized log returns (rows: tickers, columns: return dates).
/// `dates[t]` is the end date of return t.
struct ReturnPanel {
  std::vector<std::string> tickers;
  std::vector<Date> dates;
  Matrix returns;
  Matrix raw_returns;
  std::vector<double> sigmas;
  std::vector<double> means;

  std::size_t n_tickers() const noexcept { return tickers.size(); }
  std::size_t n_obs() const noexcept { return returns.cols(); }
};

enum class Layout { wide, long_format };

/// Parses a delimiter-separated price table. Rows of the result are sorted by
/// ticker and columns by date. Missing cells (empty or "NA") become NaN.
PricePanel parse_prices(std::istream& in, Layout layout, char delimiter = ',');
PricePanel load_prices(const std::filesystem::path& path, Layout layout, char delimiter = ',');

struct FillResult {
  PricePanel panel;
  std::size_t fills = 0;
};

enum class LeadingGaps { error, keep };

/// Replaces each gap with the most recent preceding price of the same ticker.
/// A gap with no preceding price is an error unless `leading` is keep, in
/// which case it stays NaN (compute_returns later drops that ticker).
FillResult fill_missing(const PricePanel& panel, LeadingGaps leading = LeadingGaps::error);

/// R_i(t) = ln P_i(t+dt) - ln P_i(t), t = 0 .. T-dt.
Matrix log_returns(const PricePanel& panel, int dt = 1);

/// Subtracts the time mean and divides by the population standard deviation.
ReturnPanel normalize(std::vector<std::string> tickers, std::vector<Date> dates, const Matrix& raw);

/// log_returns + normalize, dropping (with a warning) tickers that cannot be
/// normalized inside this panel: leading gaps or zero variance.
struct ReturnsResult {
  ReturnPanel panel;
  std::vector<std::string> dropped;
};
ReturnsResult compute_returns(const PricePanel& panel, int dt = 1);

/// Half-open date range [start, end).
struct DateRange {
  Date start;
  Date end;
};

/// k windows of equal calendar length between the first and last date.
struct CalendarSplit {
  std::size_t k = 1;
};

/// k windows of equal date count, explicit ordered non-overlapping ranges,
/// or k windows of equal calendar length.
struct WindowSpec {
  std::variant<std::size_t, std::vector<DateRange>, CalendarSplit> value{std::size_t{1}};

  static WindowSpec equal(std::size_t k) { return WindowSpec{k}; }
  static WindowSpec ranges(std::vector<DateRange> r) { return WindowSpec{std::move(r)}; }
  static WindowSpec calendar(std::size_t k) { return WindowSpec{CalendarSplit{k}}; }
};

/// Splits the date axis. Equal-count splits put the remainder in the last
/// window. A calendar split puts date d in window floor(k (d - first) / (last
/// - first)), the last date joining window k-1. Every window keeps at least
/// two dates.
std::vector<PricePanel> split_windows(const PricePanel& panel, const WindowSpec& spec);

/// Union of two markets restricted to their common date range. Tickers are
/// prefixed with "<tag>:" and carry the tag as market of origin.
PricePanel combine_universes(const PricePanel& a, const PricePanel& b, const std::string& tag_a = "A",
                             const std::string& tag_b = "B");

/// Writes the wide layout that parse_prices(Layout::wide) reads back exactly.
void write_prices_wide(std::ostream& out, const PricePanel& panel, char delimiter = ',');

/// Wide layout (date column, one column per ticker) of a return matrix; the
/// normalized returns by default, the raw log returns when `raw` is set.
void write_returns(std::ostream& out, const ReturnPanel& panel, bool raw = false);

/// Reads normalized returns written by write_returns; raw returns, means and
/// sigmas stay empty.
ReturnPanel read_returns(std::istream& in);

/// Rows (ticker, mean, sigma) of the raw log returns.
void write_return_stats(std::ostream& out, const ReturnPanel& panel);

}  // namespace corrnet
