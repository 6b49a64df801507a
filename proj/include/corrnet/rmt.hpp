#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/matrix.hpp"

namespace corrnet {

/// Eigenpairs of a real symmetric matrix. Row a of `vectors` is the
/// eigenvector of `values[a]`; values are sorted in descending order.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
  int sweeps = 0;
  double off_norm = 0.0;
};

/// Cyclic Jacobi rotations. Converged when the off-diagonal Frobenius norm is
/// at most `tol` times the Frobenius norm of the input; throws NumericalError
/// with the residual after `max_sweeps`.
/// Each eigenvector is flipped so that its largest-magnitude component is
/// positive (first such component on exact ties).
SymmetricEigen jacobi_eigen(const Matrix& a, int max_sweeps = 100, double tol = 1e-12);

struct EigenSystem {
  std::vector<std::string> tickers;
  std::vector<double> eigenvalues;
  /// Row a is u^a.
  Matrix eigenvectors;
  /// Number of observations T behind the decomposed matrix (0 if unknown).
  std::size_t n_obs = 0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double component(std::size_t alpha, std::size_t i) const noexcept { return eigenvectors(alpha, i); }
};

EigenSystem eigendecompose(const CorrelationMatrix& c, std::size_t n_obs = 0);

struct MPBounds {
  double q = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

/// lambda_min/max = (1 -/+ 1/sqrt(Q))^2 with Q = T/N. Warns when T < N.
MPBounds mp_bounds(std::size_t n, std::size_t t);

/// Marchenko-Pastur density for ratio Q >= 1; zero outside the support.
double mp_density(double lambda, double q);

/// Inclusive index range.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const noexcept { return last - first + 1; }
  bool contains(std::size_t a) const noexcept { return a >= first && a <= last; }
};

struct ModeSpec {
  std::size_t market = 0;
  IndexRange sector;
  IndexRange random;

  /// Indices in none of the three groups, ascending.
  std::vector<std::size_t> residual(std::size_t n) const;
};

/// Throws PreconditionError unless the ranges are disjoint, non-empty, exclude
/// the market index and lie inside [0, n).
void validate(const ModeSpec& spec, std::size_t n);

/// market = {0}; sector = every alpha >= 1 with lambda > lambda_max; random =
/// alpha from `random_start` (default: right after the sector) to N-1.
ModeSpec default_mode_spec(const EigenSystem& es, const MPBounds& bounds,
                           std::optional<std::size_t> random_start = std::nullopt);

enum class Mode { market, sector, random, residual };

std::string to_string(Mode mode);

/// C_mode = sum over the mode's indices of w_a u^a (u^a)^T, w_a = lambda_a when
/// `weighted`, 1 otherwise.
CorrelationMatrix mode_matrix(const EigenSystem& es, const ModeSpec& spec, Mode which, bool weighted = true);

/// Sum over an arbitrary index list (used for reconstruction checks).
Matrix mode_sum(const EigenSystem& es, const std::vector<std::size_t>& indices, bool weighted = true);

CorrelationMatrix abs_matrix(const CorrelationMatrix& c);

/// Negative entries replaced by `floor` (>= 0).
CorrelationMatrix zero_negative(const CorrelationMatrix& c, double floor = 0.0);

struct SubsectorSplit {
  std::size_t alpha = 0;
  double threshold = 0.0;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negative;
};

/// Stocks with u_i^alpha >= c go positive, u_i^alpha <= -c negative. Exact
/// zero components join neither side, even at c = 0.
/// Default c = 1/sqrt(N).
SubsectorSplit subsector_split(const EigenSystem& es, std::size_t alpha, std::optional<double> c = std::nullopt);

/// (index, eigenvalue) rows with N, T and the MP bounds in header comments.
void write_eigenvalues(std::ostream& out, const EigenSystem& es, const MPBounds& bounds);

/// One row per eigenvector (alpha), one column per ticker.
void write_eigenvectors(std::ostream& out, const EigenSystem& es);

/// Rows (alpha, ticker, side) with side "+" or "-".
void write_subsectors(std::ostream& out, const std::vector<std::string>& tickers,
                      const std::vector<SubsectorSplit>& splits);

/// (lambda, density) on `points` evenly spaced values across the support.
void write_mp_density(std::ostream& out, double q, std::size_t points = 200);

}  // namespace corrnet
