#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/matrix.hpp"
#include "corrnet/timeseries.hpp"

namespace corrnet {

enum class MatrixKind {
  full,
  market_mode,
  sector_mode,
  random_mode,
  residual_mode,
  abs_sector_mode,
  /// Sector mode with negative entries replaced by a floor.
  clipped_sector_mode,
};

std::string_view to_string(MatrixKind kind);
MatrixKind matrix_kind_from_string(std::string_view text);

/// Symmetric correlation-like matrix labelled by tickers.
struct CorrelationMatrix {
  std::vector<std::string> tickers;
  Matrix values;
  MatrixKind kind = MatrixKind::full;

  std::size_t size() const noexcept { return tickers.size(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values(i, j); }
};

/// C_ij = <r_i r_j> over time (1/T average), unit diagonal, exactly symmetric.
CorrelationMatrix correlation_matrix(const ReturnPanel& panel);

/// Equal-width histogram over the observed range of the off-diagonal upper
/// triangle. `density` integrates to one over `edges`; a degenerate range
/// (all entries equal) yields one zero-width bin with density 1 read as mass.
struct Histogram {
  std::vector<double> edges;
  std::vector<double> density;
  std::vector<double> centers() const;
};

Histogram element_histogram(const CorrelationMatrix& c, int bins);

/// Mean of C_ij over unordered pairs i < j.
double mean_offdiag(const CorrelationMatrix& c);

/// Throws PreconditionError unless symmetric within `tol`.
void require_symmetric(const Matrix& m, double tol = 1e-12);

/// Rows and columns reordered: result(a, b) = c(perm[a], perm[b]).
CorrelationMatrix permute(const CorrelationMatrix& c, const std::vector<std::size_t>& perm);

/// Dense matrix text: a "# kind:" comment, a header row of tickers, then one
/// labelled row per ticker. Values round-trip exactly.
void write_matrix(std::ostream& out, const CorrelationMatrix& c);
CorrelationMatrix read_matrix(std::istream& in);

/// "# edges:" comment, then (bin_center, density) rows.
void write_histogram(std::ostream& out, const Histogram& h);

}  // namespace corrnet
