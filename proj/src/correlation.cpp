#include "corrnet/correlation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <ostream>
#include <utility>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"
#include "corrnet/kernels.hpp"

namespace corrnet {

namespace {

constexpr std::array<std::pair<MatrixKind, std::string_view>, 7> kKindNames{{
    {MatrixKind::full, "full"},
    {MatrixKind::market_mode, "market-mode"},
    {MatrixKind::sector_mode, "sector-mode"},
    {MatrixKind::random_mode, "random-mode"},
    {MatrixKind::residual_mode, "residual-mode"},
    {MatrixKind::abs_sector_mode, "abs-sector-mode"},
    {MatrixKind::clipped_sector_mode, "clipped-sector-mode"},
}};

std::vector<double> upper_entries(const CorrelationMatrix& c) {
  const std::size_t n = c.size();
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.push_back(c(i, j));
  return out;
}

}  // namespace

std::string_view to_string(MatrixKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

MatrixKind matrix_kind_from_string(std::string_view text) {
  for (const auto& [k, name] : kKindNames)
    if (name == text) return k;
  throw ParseError("unknown matrix kind '" + std::string(text) + "'", 0);
}

CorrelationMatrix correlation_matrix(const ReturnPanel& panel) {
  if (panel.n_tickers() < 2) throw PreconditionError("correlation needs at least 2 series");
  if (panel.n_obs() < 2) throw PreconditionError("correlation needs at least 2 observations");
  CorrelationMatrix c{panel.tickers, kernels::omp::gram(panel.returns), MatrixKind::full};
  for (std::size_t i = 0; i < c.size(); ++i) c.values(i, i) = 1.0;
  return c;
}

std::vector<double> Histogram::centers() const {
  std::vector<double> out;
  for (std::size_t b = 0; b + 1 < edges.size(); ++b) out.push_back(0.5 * (edges[b] + edges[b + 1]));
  return out;
}

Histogram element_histogram(const CorrelationMatrix& c, int bins) {
  if (bins < 1) throw PreconditionError("histogram needs at least one bin");
  if (c.size() < 2) throw PreconditionError("histogram needs at least 2 series");
  const auto values = upper_entries(c);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.density = {1.0};
    return h;
  }
  const auto nb = static_cast<std::size_t>(bins);
  const double width = (hi - lo) / static_cast<double>(nb);
  h.edges.resize(nb + 1);
  for (std::size_t b = 0; b <= nb; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  std::vector<std::size_t> counts(nb, 0);
  for (double v : values) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    ++counts[std::min(b, nb - 1)];
  }
  const double total = static_cast<double>(values.size());
  h.density.resize(nb);
  for (std::size_t b = 0; b < nb; ++b)
    h.density[b] = static_cast<double>(counts[b]) / (total * (h.edges[b + 1] - h.edges[b]));
  return h;
}

double mean_offdiag(const CorrelationMatrix& c) {
  if (c.size() < 2) throw PreconditionError("mean_offdiag needs at least 2 series");
  double s = 0.0;
  for (double v : upper_entries(c)) s += v;
  const double n = static_cast<double>(c.size());
  return s / (n * (n - 1.0) / 2.0);
}

void require_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) throw PreconditionError("matrix is not square");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      if (!(std::abs(m(i, j) - m(j, i)) <= tol))
        throw PreconditionError("matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
}

CorrelationMatrix permute(const CorrelationMatrix& c, const std::vector<std::size_t>& perm) {
  const std::size_t n = c.size();
  if (perm.size() != n) throw PreconditionError("permutation length differs from matrix size");
  std::vector<char> seen(n, 0);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw PreconditionError("not a permutation");
    seen[p] = 1;
  }
  CorrelationMatrix out{{}, Matrix(n, n), c.kind};
  for (std::size_t a = 0; a < n; ++a) {
    out.tickers.push_back(c.tickers[perm[a]]);
    for (std::size_t b = 0; b < n; ++b) out.values(a, b) = c(perm[a], perm[b]);
  }
  return out;
}

void write_matrix(std::ostream& out, const CorrelationMatrix& c) {
  out << "# kind: " << to_string(c.kind) << '\n';
  out << "ticker";
  for (const auto& t : c.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << c.tickers[i];
    for (std::size_t j = 0; j < c.size(); ++j) out << ',' << format_number(c(i, j));
    out << '\n';
  }
}

CorrelationMatrix read_matrix(std::istream& in) {
  LineReader reader(in);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty matrix file", 0);
  CorrelationMatrix c;
  for (const auto& comment : reader.comments()) {
    auto colon = comment.find(':');
    if (colon != std::string::npos && split_fields(comment.substr(0, colon), ',')[0] == "kind")
      c.kind = matrix_kind_from_string(split_fields(comment.substr(colon + 1), ',')[0]);
  }
  auto header = split_fields(line, ',');
  if (header.size() < 2) throw ParseError("matrix header needs ticker columns", reader.line_number());
  c.tickers.assign(header.begin() + 1, header.end());
  const std::size_t n = c.tickers.size();
  c.values = Matrix(n, n);
  std::size_t row = 0;
  while (reader.next(line)) {
    auto f = split_fields(line, ',');
    if (row >= n) throw ParseError("more rows than tickers", reader.line_number());
    if (f.size() != n + 1) throw ParseError("matrix row needs " + std::to_string(n + 1) + " fields", reader.line_number());
    if (f[0] != c.tickers[row]) throw ParseError("row label '" + f[0] + "' does not match column order", reader.line_number());
    for (std::size_t j = 0; j < n; ++j) c.values(row, j) = parse_number(f[j + 1], reader.line_number());
    ++row;
  }
  if (row != n) throw ParseError("matrix has " + std::to_string(row) + " rows for " + std::to_string(n) + " tickers", 0);
  require_symmetric(c.values);
  return c;
}

void write_histogram(std::ostream& out, const Histogram& h) {
  out << "# edges: ";
  for (std::size_t b = 0; b < h.edges.size(); ++b) out << (b ? "," : "") << format_number(h.edges[b]);
  out << "\nbin_center,density\n";
  const auto centers = h.centers();
  for (std::size_t b = 0; b < h.density.size(); ++b)
    out << format_number(centers[b]) << ',' << format_number(h.density[b]) << '\n';
}

}  // namespace corrnet
