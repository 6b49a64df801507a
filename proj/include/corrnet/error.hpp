#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace corrnet {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Duplicate keys (tickers, dates, (ticker, date) cells).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// Values outside the domain of an operation (non-positive prices, zero variance).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Violated preconditions on arguments or shapes.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Warnings go through a process-wide sink; the default writes to std::clog.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace corrnet
