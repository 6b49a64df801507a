#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace corrnet {

/// Shortest decimal text that parses back to the identical double.
std::string format_number(double value);

/// Fixed-point text with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

/// Parses a full field as a double; throws ParseError (with line) otherwise.
double parse_number(std::string_view text, std::size_t line = 0);

/// Splits on `delimiter`, trimming surrounding blanks and a trailing '\r'.
std::vector<std::string> split_fields(std::string_view line, char delimiter);

/// Reads a whole text file; throws Error when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Line reader that tracks 1-based line numbers and skips '#' comment lines
/// and blank lines. Comment lines are collected in `comments()`.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_no_; }
  const std::vector<std::string>& comments() const noexcept { return comments_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
  std::vector<std::string> comments_;
};

}  // namespace corrnet
