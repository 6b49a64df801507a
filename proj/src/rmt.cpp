#include "corrnet/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include "corrnet/error.hpp"
#include "corrnet/io.hpp"
#include "corrnet/kernels.hpp"

namespace corrnet {

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

// Zeroes a(p, q) with one rotation; w holds eigenvectors as rows.
void rotate(Matrix& a, Matrix& w, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();
  auto rp = a.row(p);
  auto rq = a.row(q);
  for (std::size_t k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = rp[k];
    const double akq = rq[k];
    rp[k] = c * akp - s * akq;
    rq[k] = s * akp + c * akq;
    a(k, p) = rp[k];
    a(k, q) = rq[k];
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  auto wp = w.row(p);
  auto wq = w.row(q);
  for (std::size_t k = 0; k < n; ++k) {
    const double vp = wp[k];
    const double vq = wq[k];
    wp[k] = c * vp - s * vq;
    wq[k] = s * vp + c * vq;
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(const Matrix& input, int max_sweeps, double tol) {
  require_symmetric(input, 0.0);
  const std::size_t n = input.rows();
  Matrix a = input;
  Matrix w = Matrix::identity(n);
  const double scale = std::max(frobenius(input), std::numeric_limits<double>::min());
  int sweeps = 0;
  double off = off_diagonal_norm(a);
  while (off > tol * scale) {
    if (sweeps == max_sweeps)
      throw NumericalError("Jacobi did not converge in " + std::to_string(max_sweeps) +
                           " sweeps; off-diagonal residual " + format_number(off));
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) rotate(a, w, p, q);
    ++sweeps;
    off = off_diagonal_norm(a);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

  SymmetricEigen out;
  out.sweeps = sweeps;
  out.off_norm = off;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t src = order[r];
    out.values[r] = a(src, src);
    auto v = w.row(src);
    std::size_t lead = 0;
    for (std::size_t k = 1; k < n; ++k)
      if (std::abs(v[k]) > std::abs(v[lead])) lead = k;
    const double sign = v[lead] < 0.0 ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = sign * v[k] + 0.0;
  }
  return out;
}

EigenSystem eigendecompose(const CorrelationMatrix& c, std::size_t n_obs) {
  if (c.kind != MatrixKind::full) throw PreconditionError("eigendecompose expects a full correlation matrix");
  require_symmetric(c.values);
  auto eig = jacobi_eigen(c.values);
  return EigenSystem{c.tickers, std::move(eig.values), std::move(eig.vectors), n_obs};
}

MPBounds mp_bounds(std::size_t n, std::size_t t) {
  if (n == 0 || t == 0) throw PreconditionError("mp_bounds needs positive N and T");
  if (t < n) warn("T = " + std::to_string(t) + " is below N = " + std::to_string(n) + "; Q < 1");
  MPBounds b;
  b.q = static_cast<double>(t) / static_cast<double>(n);
  const double r = 1.0 / std::sqrt(b.q);
  b.lambda_min = (1.0 - r) * (1.0 - r);
  b.lambda_max = (1.0 + r) * (1.0 + r);
  return b;
}

double mp_density(double lambda, double q) {
  if (!(q >= 1.0)) throw PreconditionError("mp_density needs Q >= 1");
  const double r = 1.0 / std::sqrt(q);
  const double lo = (1.0 - r) * (1.0 - r);
  const double hi = (1.0 + r) * (1.0 + r);
  if (lambda <= lo || lambda >= hi || lambda <= 0.0) return 0.0;
  return q / (2.0 * std::numbers::pi) * std::sqrt((hi - lambda) * (lambda - lo)) / lambda;
}

std::vector<std::size_t> ModeSpec::residual(std::size_t n) const {
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < n; ++a)
    if (a != market && !sector.contains(a) && !random.contains(a)) out.push_back(a);
  return out;
}

void validate(const ModeSpec& spec, std::size_t n) {
  auto check = [&](const IndexRange& r, const char* name) {
    if (r.first > r.last) throw PreconditionError(std::string(name) + " range is empty");
    if (r.last >= n) throw PreconditionError(std::string(name) + " range exceeds N-1 = " + std::to_string(n - 1));
    if (r.contains(spec.market)) throw PreconditionError(std::string(name) + " range contains the market index");
  };
  if (spec.market >= n) throw PreconditionError("market index out of range");
  check(spec.sector, "sector");
  check(spec.random, "random");
  if (spec.sector.first <= spec.random.last && spec.random.first <= spec.sector.last)
    throw PreconditionError("sector and random ranges overlap");
}

ModeSpec default_mode_spec(const EigenSystem& es, const MPBounds& bounds, std::optional<std::size_t> random_start) {
  const std::size_t n = es.size();
  std::size_t k = 0;
  while (k + 1 < n && es.eigenvalues[k + 1] > bounds.lambda_max) ++k;
  if (k == 0)
    throw PreconditionError("no eigenvalue besides the largest exceeds lambda_max = " +
                            format_number(bounds.lambda_max) + "; give the sector range explicitly");
  ModeSpec spec;
  spec.market = 0;
  spec.sector = {1, k};
  const std::size_t start = random_start.value_or(k + 1);
  if (start >= n) throw PreconditionError("random range is empty: every mode lies above lambda_max");
  spec.random = {start, n - 1};
  validate(spec, n);
  return spec;
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::market: return "market";
    case Mode::sector: return "sector";
    case Mode::random: return "random";
    case Mode::residual: return "residual";
  }
  return "unknown";
}

Matrix mode_sum(const EigenSystem& es, const std::vector<std::size_t>& indices, bool weighted) {
  for (auto a : indices)
    if (a >= es.size()) throw PreconditionError("mode index out of range");
  std::vector<double> weights = weighted ? es.eigenvalues : std::vector<double>(es.size(), 1.0);
  return kernels::omp::mode_sum(es.eigenvectors, weights, indices);
}

CorrelationMatrix mode_matrix(const EigenSystem& es, const ModeSpec& spec, Mode which, bool weighted) {
  validate(spec, es.size());
  std::vector<std::size_t> idx;
  MatrixKind kind = MatrixKind::market_mode;
  auto add_range = [&](const IndexRange& r) {
    for (std::size_t a = r.first; a <= r.last; ++a) idx.push_back(a);
  };
  switch (which) {
    case Mode::market:
      idx.push_back(spec.market);
      break;
    case Mode::sector:
      add_range(spec.sector);
      kind = MatrixKind::sector_mode;
      break;
    case Mode::random:
      add_range(spec.random);
      kind = MatrixKind::random_mode;
      break;
    case Mode::residual:
      idx = spec.residual(es.size());
      kind = MatrixKind::residual_mode;
      break;
  }
  return CorrelationMatrix{es.tickers, mode_sum(es, idx, weighted), kind};
}

CorrelationMatrix abs_matrix(const CorrelationMatrix& c) {
  CorrelationMatrix out = c;
  for (double& v : out.values.data()) v = std::abs(v);
  out.kind = MatrixKind::abs_sector_mode;
  return out;
}

CorrelationMatrix zero_negative(const CorrelationMatrix& c, double floor) {
  if (!(floor >= 0.0)) throw PreconditionError("floor must be non-negative");
  CorrelationMatrix out = c;
  for (double& v : out.values.data())
    if (v < 0.0) v = floor;
  out.kind = MatrixKind::clipped_sector_mode;
  return out;
}

SubsectorSplit subsector_split(const EigenSystem& es, std::size_t alpha, std::optional<double> c) {
  if (alpha >= es.size()) throw PreconditionError("eigen index out of range");
  SubsectorSplit s;
  s.alpha = alpha;
  s.threshold = c.value_or(1.0 / std::sqrt(static_cast<double>(es.size())));
  if (!(s.threshold >= 0.0)) throw PreconditionError("subsector threshold must be non-negative");
  for (std::size_t i = 0; i < es.size(); ++i) {
    const double u = es.component(alpha, i);
    if (u >= s.threshold && u > 0.0)
      s.positive.push_back(i);
    else if (u <= -s.threshold && u < 0.0)
      s.negative.push_back(i);
  }
  return s;
}

void write_eigenvalues(std::ostream& out, const EigenSystem& es, const MPBounds& bounds) {
  out << "# N: " << es.size() << "\n# T: " << es.n_obs << "\n# Q: " << format_number(bounds.q)
      << "\n# lambda_min: " << format_number(bounds.lambda_min) << "\n# lambda_max: " << format_number(bounds.lambda_max)
      << "\nindex,eigenvalue\n";
  for (std::size_t a = 0; a < es.size(); ++a) out << a << ',' << format_number(es.eigenvalues[a]) << '\n';
}

void write_eigenvectors(std::ostream& out, const EigenSystem& es) {
  out << "alpha";
  for (const auto& t : es.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t a = 0; a < es.size(); ++a) {
    out << a;
    for (std::size_t i = 0; i < es.size(); ++i) out << ',' << format_number(es.component(a, i));
    out << '\n';
  }
}

void write_subsectors(std::ostream& out, const std::vector<std::string>& tickers,
                      const std::vector<SubsectorSplit>& splits) {
  out << "alpha,ticker,side\n";
  for (const auto& s : splits) {
    for (auto i : s.positive) out << s.alpha << ',' << tickers[i] << ",+\n";
    for (auto i : s.negative) out << s.alpha << ',' << tickers[i] << ",-\n";
  }
}

void write_mp_density(std::ostream& out, double q, std::size_t points) {
  const double r = 1.0 / std::sqrt(q);
  const double lo = (1.0 - r) * (1.0 - r);
  const double hi = (1.0 + r) * (1.0 + r);
  out << "lambda,density\n";
  for (std::size_t k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * (static_cast<double>(k) + 0.5) / static_cast<double>(points);
    out << format_number(x) << ',' << format_number(mp_density(x, q)) << '\n';
  }
}

}  // namespace corrnet
