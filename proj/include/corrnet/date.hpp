#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace corrnet {

/// Calendar date (day resolution), ISO-8601 in text form.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
  Date(int y, unsigned m, unsigned d);

  /// Parses YYYY-MM-DD; throws ParseError on anything else.
  static Date parse(std::string_view text, std::size_t line = 0);

  std::chrono::sys_days days() const noexcept { return days_; }
  std::chrono::year_month_day ymd() const noexcept { return std::chrono::year_month_day{days_}; }
  std::string iso() const;

  Date plus_days(int n) const noexcept { return Date{days_ + std::chrono::days{n}}; }
  bool is_weekday() const noexcept;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace corrnet
