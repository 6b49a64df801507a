#pragma once

// NYSE trading calendar 1990-2006 built from the exchange holiday rules plus
// the unscheduled closures of that period.

#include <chrono>
#include <set>
#include <vector>

#include "corrnet/date.hpp"

namespace support {

namespace detail {

inline corrnet::Date nth_weekday(int y, unsigned m, unsigned weekday, int n) {
  using namespace std::chrono;
  return corrnet::Date{sys_days{year{y} / month{m} / weekday_indexed{std::chrono::weekday{weekday}, static_cast<unsigned>(n)}}};
}

inline corrnet::Date last_weekday(int y, unsigned m, unsigned weekday) {
  using namespace std::chrono;
  return corrnet::Date{sys_days{year{y} / month{m} / weekday_last{std::chrono::weekday{weekday}}}};
}

// Anonymous Gregorian computus.
inline corrnet::Date easter(int y) {
  const int a = y % 19, b = y / 100, c = y % 100, d = b / 4, e = b % 4, f = (b + 8) / 25, g = (b - f + 1) / 3;
  const int h = (19 * a + b - d - g + 15) % 30, i = c / 4, k = c % 4, l = (32 + 2 * e + 2 * i - h - k) % 7;
  const int m = (a + 11 * h + 22 * l) / 451;
  const int month = (h + l - 7 * m + 114) / 31, day = (h + l - 7 * m + 114) % 31 + 1;
  return corrnet::Date(y, static_cast<unsigned>(month), static_cast<unsigned>(day));
}

// Saturday holidays move to Friday, Sunday holidays to Monday.
inline corrnet::Date observed(corrnet::Date d) {
  using namespace std::chrono;
  const weekday w{d.days()};
  if (w == Saturday) return d.plus_days(-1);
  if (w == Sunday) return d.plus_days(1);
  return d;
}

}  // namespace detail

inline std::vector<corrnet::Date> nyse_trading_days(int first_year, int last_year) {
  using corrnet::Date;
  std::set<Date> closed;
  for (int y = first_year; y <= last_year; ++y) {
    Date ny(y, 1, 1);
    // No Friday observance when New Year falls on a Saturday.
    if (std::chrono::weekday{ny.days()} == std::chrono::Sunday) closed.insert(ny.plus_days(1));
    else closed.insert(ny);
    if (y >= 1998) closed.insert(detail::nth_weekday(y, 1, 1, 3));
    closed.insert(detail::nth_weekday(y, 2, 1, 3));
    closed.insert(detail::easter(y).plus_days(-2));
    closed.insert(detail::last_weekday(y, 5, 1));
    closed.insert(detail::observed(Date(y, 7, 4)));
    closed.insert(detail::nth_weekday(y, 9, 1, 1));
    closed.insert(detail::nth_weekday(y, 11, 4, 4));
    closed.insert(detail::observed(Date(y, 12, 25)));
  }
  for (Date d : {Date(1994, 4, 27), Date(2001, 9, 11), Date(2001, 9, 12), Date(2001, 9, 13), Date(2001, 9, 14),
                 Date(2004, 6, 11)})
    closed.insert(d);
  std::vector<Date> out;
  for (Date d(first_year, 1, 1); d < Date(last_year + 1, 1, 1); d = d.plus_days(1))
    if (d.is_weekday() && !closed.contains(d)) out.push_back(d);
  return out;
}

}  // namespace support
