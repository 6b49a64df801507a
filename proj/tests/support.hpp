#pragma once

// Small builders shared by the tests.

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "corrnet/correlation.hpp"
#include "corrnet/error.hpp"
#include "corrnet/matrix.hpp"

namespace support {

inline std::vector<std::string> tickers(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("T" + std::to_string(100 + i));
  return t;
}

inline corrnet::CorrelationMatrix matrix_of(const std::vector<std::vector<double>>& rows,
                                            corrnet::MatrixKind kind = corrnet::MatrixKind::full) {
  corrnet::CorrelationMatrix c;
  c.kind = kind;
  c.tickers = tickers(rows.size());
  c.values = corrnet::Matrix(rows.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j) c.values(i, j) = rows[i][j];
  return c;
}

/// Symmetric matrix with unit diagonal and off-diagonal entries uniform in [lo, hi].
inline corrnet::CorrelationMatrix random_symmetric(std::size_t n, std::mt19937_64& rng, double lo = -1.0,
                                                   double hi = 1.0,
                                                   corrnet::MatrixKind kind = corrnet::MatrixKind::full) {
  std::uniform_real_distribution<double> u(lo, hi);
  corrnet::CorrelationMatrix c;
  c.kind = kind;
  c.tickers = tickers(n);
  c.values = corrnet::Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    c.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) c.values(i, j) = c.values(j, i) = u(rng);
  }
  return c;
}

/// Off-diagonal entries +1 or -1 with equal probability.
inline corrnet::CorrelationMatrix random_sign(std::size_t n, std::mt19937_64& rng,
                                              corrnet::MatrixKind kind = corrnet::MatrixKind::sector_mode) {
  std::bernoulli_distribution coin(0.5);
  auto c = random_symmetric(n, rng, -1, 1, kind);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) c.values(i, j) = c.values(j, i) = coin(rng) ? 1.0 : -1.0;
  return c;
}

/// Fresh empty directory below the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("corrnet_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Captures warnings for the lifetime of the object.
struct WarningCapture {
  std::vector<std::string> messages;
  WarningCapture() {
    corrnet::set_warning_sink([this](const std::string& m) { messages.push_back(m); });
  }
  ~WarningCapture() { corrnet::set_warning_sink(nullptr); }
};

}  // namespace support
