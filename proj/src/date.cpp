#include "corrnet/date.hpp"

#include <charconv>
#include <cstdio>

#include "corrnet/error.hpp"

namespace corrnet {

Date::Date(int y, unsigned m, unsigned d) {
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw PreconditionError("invalid calendar date");
  days_ = std::chrono::sys_days{ymd};
}

Date Date::parse(std::string_view text, std::size_t line) {
  auto fail = [&] { return ParseError("bad ISO-8601 date '" + std::string(text) + "'", line); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw fail();
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::size_t pos, std::size_t len, auto& out) {
    auto first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    if (ec != std::errc{} || ptr != first + len) throw fail();
  };
  num(0, 4, y);
  num(5, 2, m);
  num(8, 2, d);
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw fail();
  return Date{std::chrono::sys_days{ymd}};
}

std::string Date::iso() const {
  auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()), static_cast<unsigned>(v.month()),
                static_cast<unsigned>(v.day()));
  return buf;
}

bool Date::is_weekday() const noexcept {
  auto wd = std::chrono::weekday{days_}.c_encoding();
  return wd != 0 && wd != 6;
}

}  // namespace corrnet
