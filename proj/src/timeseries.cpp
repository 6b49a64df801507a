#include "corrnet/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"

namespace corrnet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_missing_token(const std::string& s) { return s.empty() || s == "NA"; }

double parse_price(const std::string& field, std::size_t line) {
  double v = parse_number(field, line);
  if (!std::isfinite(v) || v <= 0.0) throw ParseError("price must be positive and finite, got '" + field + "'", line);
  return v;
}

std::string tag_of(const std::string& ticker) {
  auto pos = ticker.find(':');
  return pos == std::string::npos ? std::string{} : ticker.substr(0, pos);
}

// Builds a panel from (ticker -> date -> price) cells, sorting both axes.
PricePanel assemble(const std::map<std::string, std::map<Date, double>>& cells, const std::set<Date>& all_dates) {
  PricePanel p;
  p.dates.assign(all_dates.begin(), all_dates.end());
  p.prices = Matrix(cells.size(), p.dates.size(), kNaN);
  std::size_t i = 0;
  for (const auto& [ticker, row] : cells) {
    p.tickers.push_back(ticker);
    p.market_tags.push_back(tag_of(ticker));
    std::size_t t = 0;
    for (const auto& [date, price] : row) {
      while (p.dates[t] < date) ++t;
      p.prices(i, t) = price;
    }
    ++i;
  }
  return p;
}

void validate_loaded(const PricePanel& p) {
  if (p.n_tickers() < 2) throw PreconditionError("price file needs at least 2 tickers");
  if (p.n_dates() < 3) throw PreconditionError("price file needs at least 3 dates");
  for (std::size_t i = 0; i < p.n_tickers(); ++i) {
    auto row = p.prices.row(i);
    auto present = std::count_if(row.begin(), row.end(), [](double v) { return !std::isnan(v); });
    if (present < 2) throw PreconditionError("ticker '" + p.tickers[i] + "' has fewer than 2 observations");
  }
}

PricePanel parse_wide(std::istream& in, char delim) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty price file", 0);
  auto header = split_fields(line, delim);
  if (header.size() < 2) throw ParseError("wide header needs a date column and ticker columns", reader.line_number());
  std::vector<std::string> tickers(header.begin() + 1, header.end());
  {
    std::set<std::string> seen;
    for (const auto& t : tickers) {
      if (t.empty()) throw ParseError("empty ticker name in header", reader.line_number());
      if (!seen.insert(t).second) throw ConflictError("duplicate ticker column '" + t + "'");
    }
  }
  std::map<std::string, std::map<Date, double>> cells;
  for (const auto& t : tickers) cells[t];
  std::set<Date> dates;
  while (reader.next(line)) {
    auto fields = split_fields(line, delim);
    const auto ln = reader.line_number();
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()),
                       ln);
    Date d = Date::parse(fields[0], ln);
    if (!dates.insert(d).second) throw ConflictError("duplicate date " + d.iso() + " (line " + std::to_string(ln) + ")");
    for (std::size_t c = 1; c < fields.size(); ++c) {
      if (is_missing_token(fields[c])) continue;
      cells[tickers[c - 1]][d] = parse_price(fields[c], ln);
    }
  }
  return assemble(cells, dates);
}

PricePanel parse_long(std::istream& in, char delim) {
  LineReader reader(in);
  std::string line;
  std::map<std::string, std::map<Date, double>> cells;
  std::set<Date> dates;
  bool first = true;
  while (reader.next(line)) {
    auto fields = split_fields(line, delim);
    const auto ln = reader.line_number();
    if (fields.size() != 3) throw ParseError("long layout expects date,ticker,price", ln);
    if (first) {
      first = false;
      // Optional header row.
      if (fields[0].size() != 10 || fields[0][4] != '-') continue;
    }
    Date d = Date::parse(fields[0], ln);
    if (fields[1].empty()) throw ParseError("empty ticker", ln);
    dates.insert(d);
    auto& row = cells[fields[1]];
    if (row.count(d)) throw ConflictError("duplicate cell (" + fields[1] + ", " + d.iso() + ") at line " + std::to_string(ln));
    if (is_missing_token(fields[2])) {
      row[d] = kNaN;
      continue;
    }
    row[d] = parse_price(fields[2], ln);
  }
  return assemble(cells, dates);
}

PricePanel slice_dates(const PricePanel& p, std::size_t first, std::size_t last) {
  PricePanel w;
  w.tickers = p.tickers;
  w.market_tags = p.market_tags;
  w.dates.assign(p.dates.begin() + static_cast<std::ptrdiff_t>(first), p.dates.begin() + static_cast<std::ptrdiff_t>(last));
  w.prices = Matrix(p.n_tickers(), last - first);
  for (std::size_t i = 0; i < p.n_tickers(); ++i)
    for (std::size_t t = first; t < last; ++t) w.prices(i, t - first) = p.prices(i, t);
  return w;
}

}  // namespace

std::size_t PricePanel::count_missing() const {
  auto d = prices.data();
  return static_cast<std::size_t>(std::count_if(d.begin(), d.end(), [](double v) { return std::isnan(v); }));
}

PricePanel parse_prices(std::istream& in, Layout layout, char delimiter) {
  PricePanel p = layout == Layout::wide ? parse_wide(in, delimiter) : parse_long(in, delimiter);
  validate_loaded(p);
  return p;
}

PricePanel load_prices(const std::filesystem::path& path, Layout layout, char delimiter) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open price file " + path.string());
  return parse_prices(in, layout, delimiter);
}

FillResult fill_missing(const PricePanel& panel, LeadingGaps leading) {
  FillResult r{panel, 0};
  auto& p = r.panel;
  for (std::size_t i = 0; i < p.n_tickers(); ++i) {
    if (p.n_dates() > 0 && std::isnan(p.prices(i, 0)) && leading == LeadingGaps::error)
      throw DomainError("leading gap: ticker '" + p.tickers[i] + "' has no price on " + p.dates[0].iso());
    for (std::size_t t = 1; t < p.n_dates(); ++t) {
      if (std::isnan(p.prices(i, t)) && !std::isnan(p.prices(i, t - 1))) {
        p.prices(i, t) = p.prices(i, t - 1);
        ++r.fills;
      }
    }
  }
  return r;
}

Matrix log_returns(const PricePanel& panel, int dt) {
  if (dt < 1) throw PreconditionError("dt must be >= 1");
  const auto n_dates = panel.n_dates();
  if (n_dates <= static_cast<std::size_t>(dt)) throw PreconditionError("need more than dt dates for log returns");
  const std::size_t T = n_dates - static_cast<std::size_t>(dt);
  Matrix r(panel.n_tickers(), T);
  for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
    for (std::size_t t = 0; t < n_dates; ++t) {
      double v = panel.prices(i, t);
      if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError("non-positive or missing price for '" + panel.tickers[i] + "' on " + panel.dates[t].iso());
    }
    for (std::size_t t = 0; t < T; ++t)
      r(i, t) = std::log(panel.prices(i, t + static_cast<std::size_t>(dt))) - std::log(panel.prices(i, t));
  }
  return r;
}

ReturnPanel normalize(std::vector<std::string> tickers, std::vector<Date> dates, const Matrix& raw) {
  if (tickers.size() != raw.rows()) throw PreconditionError("ticker count does not match return rows");
  if (!dates.empty() && dates.size() != raw.cols()) throw PreconditionError("date count does not match return columns");
  const std::size_t N = raw.rows(), T = raw.cols();
  if (T < 2) throw PreconditionError("need at least 2 returns to normalize");
  ReturnPanel out;
  out.tickers = std::move(tickers);
  out.dates = std::move(dates);
  out.raw_returns = raw;
  out.returns = Matrix(N, T);
  out.sigmas.resize(N);
  out.means.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    auto row = raw.row(i);
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / static_cast<double>(T);
    double ss = 0.0;
    for (double v : row) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(T));
    if (!(sigma > 0.0) || sigma <= 1e-12 * std::abs(mean))
      throw DomainError("zero-variance return series for ticker '" + out.tickers[i] + "'");
    out.means[i] = mean;
    out.sigmas[i] = sigma;
    for (std::size_t t = 0; t < T; ++t) out.returns(i, t) = (row[t] - mean) / sigma;
  }
  return out;
}

ReturnsResult compute_returns(const PricePanel& panel, int dt) {
  if (dt < 1) throw PreconditionError("dt must be >= 1");
  ReturnsResult result;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
    auto row = panel.prices.row(i);
    if (std::any_of(row.begin(), row.end(), [](double v) { return std::isnan(v); })) {
      warn("dropping '" + panel.tickers[i] + "': gap without a preceding price in this window");
      result.dropped.push_back(panel.tickers[i]);
      continue;
    }
    keep.push_back(i);
  }
  PricePanel kept;
  kept.dates = panel.dates;
  kept.prices = Matrix(keep.size(), panel.n_dates());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept.tickers.push_back(panel.tickers[keep[k]]);
    kept.market_tags.push_back(panel.market_tags.empty() ? std::string{} : panel.market_tags[keep[k]]);
    for (std::size_t t = 0; t < panel.n_dates(); ++t) kept.prices(k, t) = panel.prices(keep[k], t);
  }
  Matrix raw = log_returns(kept, dt);

  // Drop zero-variance rows before normalizing.
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    auto row = raw.row(i);
    const bool constant = std::all_of(row.begin(), row.end(), [&](double v) { return v == row[0]; });
    if (constant) {
      warn("dropping '" + kept.tickers[i] + "': zero variance in this window");
      result.dropped.push_back(kept.tickers[i]);
    } else {
      live.push_back(i);
    }
  }
  Matrix live_raw(live.size(), raw.cols());
  std::vector<std::string> names;
  for (std::size_t k = 0; k < live.size(); ++k) {
    names.push_back(kept.tickers[live[k]]);
    for (std::size_t t = 0; t < raw.cols(); ++t) live_raw(k, t) = raw(live[k], t);
  }
  std::vector<Date> dates(kept.dates.begin() + dt, kept.dates.end());
  result.panel = normalize(std::move(names), std::move(dates), live_raw);
  return result;
}

std::vector<PricePanel> split_windows(const PricePanel& panel, const WindowSpec& spec) {
  std::vector<PricePanel> out;
  const std::size_t n = panel.n_dates();
  if (const auto* k = std::get_if<std::size_t>(&spec.value)) {
    if (*k < 1) throw PreconditionError("window count must be >= 1");
    const std::size_t size = n / *k;
    if (size < 2) throw PreconditionError("window with fewer than 2 dates");
    for (std::size_t w = 0; w < *k; ++w) {
      const std::size_t first = w * size;
      const std::size_t last = (w + 1 == *k) ? n : first + size;
      out.push_back(slice_dates(panel, first, last));
    }
    return out;
  }
  if (const auto* cal = std::get_if<CalendarSplit>(&spec.value)) {
    if (cal->k < 1) throw PreconditionError("window count must be >= 1");
    if (n < 2) throw PreconditionError("window with fewer than 2 dates");
    const auto first_day = panel.dates.front().days();
    const auto span = (panel.dates.back().days() - first_day).count();
    std::size_t begin = 0;
    for (std::size_t w = 0; w < cal->k; ++w) {
      std::size_t end = begin;
      while (end < n) {
        const auto offset = (panel.dates[end].days() - first_day).count();
        const auto slot = std::min<std::size_t>(cal->k - 1, static_cast<std::size_t>(offset) * cal->k /
                                                                static_cast<std::size_t>(std::max<long>(span, 1)));
        if (slot > w) break;
        ++end;
      }
      if (end < begin + 2) throw PreconditionError("calendar window " + std::to_string(w + 1) + " has fewer than 2 dates");
      out.push_back(slice_dates(panel, begin, end));
      begin = end;
    }
    return out;
  }
  const auto& ranges = std::get<std::vector<DateRange>>(spec.value);
  if (ranges.empty()) throw PreconditionError("empty window list");
  for (std::size_t w = 0; w < ranges.size(); ++w) {
    if (!(ranges[w].start < ranges[w].end)) throw PreconditionError("window start must precede its end");
    if (w > 0 && ranges[w].start < ranges[w - 1].end) throw PreconditionError("windows overlap or are out of order");
    auto lo = std::lower_bound(panel.dates.begin(), panel.dates.end(), ranges[w].start);
    auto hi = std::lower_bound(panel.dates.begin(), panel.dates.end(), ranges[w].end);
    const auto first = static_cast<std::size_t>(lo - panel.dates.begin());
    const auto last = static_cast<std::size_t>(hi - panel.dates.begin());
    if (last < first + 2)
      throw PreconditionError("window " + ranges[w].start.iso() + " .. " + ranges[w].end.iso() +
                              " has fewer than 2 dates");
    out.push_back(slice_dates(panel, first, last));
  }
  return out;
}

PricePanel combine_universes(const PricePanel& a, const PricePanel& b, const std::string& tag_a,
                             const std::string& tag_b) {
  if (a.dates.empty() || b.dates.empty()) throw PreconditionError("cannot combine an empty panel");
  const Date start = std::max(a.dates.front(), b.dates.front());
  const Date end = std::min(a.dates.back(), b.dates.back());
  if (end < start) throw PreconditionError("markets have an empty date overlap");

  std::set<Date> dates;
  for (const auto* p : {&a, &b})
    for (const auto& d : p->dates)
      if (!(d < start) && !(end < d)) dates.insert(d);

  std::map<std::string, std::pair<const PricePanel*, std::size_t>> rows;
  std::map<std::string, std::string> tags;
  for (auto [p, tag] : {std::pair{&a, &tag_a}, std::pair{&b, &tag_b}}) {
    for (std::size_t i = 0; i < p->n_tickers(); ++i) {
      std::string name = *tag + ":" + p->tickers[i];
      if (!rows.emplace(name, std::pair{p, i}).second) throw ConflictError("duplicate ticker after tagging: " + name);
      tags[name] = *tag;
    }
  }

  PricePanel out;
  out.dates.assign(dates.begin(), dates.end());
  out.prices = Matrix(rows.size(), out.dates.size(), kNaN);
  std::size_t r = 0;
  for (const auto& [name, src] : rows) {
    out.tickers.push_back(name);
    out.market_tags.push_back(tags[name]);
    const auto& [p, i] = src;
    for (std::size_t t = 0; t < out.dates.size(); ++t) {
      auto it = std::lower_bound(p->dates.begin(), p->dates.end(), out.dates[t]);
      if (it != p->dates.end() && *it == out.dates[t]) {
        out.prices(r, t) = p->prices(i, static_cast<std::size_t>(it - p->dates.begin()));
      } else if (t == 0) {
        // First aligned date missing in this market: carry its last earlier price.
        for (auto k = static_cast<std::ptrdiff_t>(it - p->dates.begin()) - 1; k >= 0; --k) {
          double v = p->prices(i, static_cast<std::size_t>(k));
          if (!std::isnan(v)) {
            out.prices(r, t) = v;
            break;
          }
        }
      }
    }
    ++r;
  }
  return out;
}

void write_prices_wide(std::ostream& out, const PricePanel& panel, char delimiter) {
  out << "date";
  for (const auto& t : panel.tickers) out << delimiter << t;
  out << '\n';
  for (std::size_t t = 0; t < panel.n_dates(); ++t) {
    out << panel.dates[t].iso();
    for (std::size_t i = 0; i < panel.n_tickers(); ++i) {
      out << delimiter;
      const double v = panel.prices(i, t);
      if (std::isnan(v))
        out << "NA";
      else
        out << format_number(v);
    }
    out << '\n';
  }
}

void write_returns(std::ostream& out, const ReturnPanel& panel, bool raw) {
  const Matrix& m = raw ? panel.raw_returns : panel.returns;
  out << "# kind: " << (raw ? "raw" : "normalized") << '\n';
  out << "date";
  for (const auto& t : panel.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t t = 0; t < panel.n_obs(); ++t) {
    out << panel.dates[t].iso();
    for (std::size_t i = 0; i < panel.n_tickers(); ++i) out << ',' << format_number(m(i, t));
    out << '\n';
  }
}

ReturnPanel read_returns(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty returns file", 0);
  auto header = split_fields(line, ',');
  if (header.size() < 2 || header[0] != "date") throw ParseError("returns header must start with 'date'", reader.line_number());
  ReturnPanel p;
  p.tickers.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> cols;
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (f.size() != header.size()) throw ParseError("row has " + std::to_string(f.size()) + " fields, expected " +
                                                    std::to_string(header.size()), reader.line_number());
    p.dates.push_back(Date::parse(f[0], reader.line_number()));
    std::vector<double> col;
    for (std::size_t i = 1; i < f.size(); ++i) col.push_back(parse_number(f[i], reader.line_number()));
    cols.push_back(std::move(col));
  }
  p.returns = Matrix(p.tickers.size(), cols.size());
  for (std::size_t t = 0; t < cols.size(); ++t)
    for (std::size_t i = 0; i < p.tickers.size(); ++i) p.returns(i, t) = cols[t][i];
  return p;
}

void write_return_stats(std::ostream& out, const ReturnPanel& panel) {
  out << "ticker,mean,sigma\n";
  for (std::size_t i = 0; i < panel.n_tickers(); ++i)
    out << panel.tickers[i] << ',' << format_number(panel.means[i]) << ',' << format_number(panel.sigmas[i]) << '\n';
}

}  // namespace corrnet
