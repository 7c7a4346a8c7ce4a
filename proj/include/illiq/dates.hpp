#pragma once

// Calendar handling for daily price series: strict date parsing (ISO and
// US month/day/year), weekday logic, and weekday-calendar construction,
// built on the std::chrono calendar types.

#include <cctype>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "illiq/error.hpp"

namespace illiq {

using Date = std::chrono::year_month_day;

enum class DateFormat { iso, mdy };  // YYYY-MM-DD vs MM/DD/YYYY

inline std::chrono::sys_days to_days(Date d) { return std::chrono::sys_days{d}; }
inline Date from_days(std::chrono::sys_days d) { return Date{d}; }
inline Date add_days(Date d, int n) { return from_days(to_days(d) + std::chrono::days{n}); }
inline std::chrono::weekday weekday_of(Date d) { return std::chrono::weekday{to_days(d)}; }

inline bool is_weekend(Date d) {
  auto wd = weekday_of(d);
  return wd == std::chrono::Saturday || wd == std::chrono::Sunday;
}

namespace detail {

// Parses min_digits..max_digits decimal digits at pos; advances pos past
// them.
inline bool read_int(std::string_view s, std::size_t& pos, int min_digits, int max_digits,
                     int& out) {
  int digits = 0;
  long value = 0;
  while (pos < s.size() && digits < max_digits && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    value = value * 10 + (s[pos] - '0');
    ++pos;
    ++digits;
  }
  if (digits < min_digits) return false;
  out = static_cast<int>(value);
  return true;
}

}  // namespace detail

inline Date make_date(int year, int month, int day) {
  Date d{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
         std::chrono::day{static_cast<unsigned>(day)}};
  require(d.ok(), errc::parse,
          "invalid calendar date " + std::to_string(year) + "-" + std::to_string(month) + "-" +
              std::to_string(day));
  return d;
}

// ISO dates are fixed-width YYYY-MM-DD; the vendor mdy form tolerates
// unpadded month and day (1/3/2023) but insists on a four-digit year.
inline Date parse_date(std::string_view text, DateFormat fmt) {
  std::size_t pos = 0;
  int a = 0, b = 0, c = 0;
  const bool iso = fmt == DateFormat::iso;
  const char sep = iso ? '-' : '/';
  bool ok = detail::read_int(text, pos, iso ? 4 : 1, iso ? 4 : 2, a);
  ok = ok && pos < text.size() && text[pos] == sep && (++pos, true);
  ok = ok && detail::read_int(text, pos, iso ? 2 : 1, 2, b);
  ok = ok && pos < text.size() && text[pos] == sep && (++pos, true);
  ok = ok && detail::read_int(text, pos, iso ? 2 : 4, iso ? 2 : 4, c);
  ok = ok && pos == text.size();
  require(ok, errc::parse, "unparseable date '" + std::string(text) + "'");
  return iso ? make_date(a, b, c) : make_date(c, a, b);
}

inline std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

// Accepts full English names or three-letter prefixes, case-insensitive.
inline std::chrono::weekday parse_weekday(std::string_view name) {
  static constexpr const char* names[7] = {"sunday",   "monday", "tuesday", "wednesday",
                                           "thursday", "friday", "saturday"};
  std::string lower;
  for (char ch : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  for (unsigned i = 0; i < 7; ++i) {
    std::string_view full = names[i];
    if (lower == full || (lower.size() == 3 && full.substr(0, 3) == lower))
      return std::chrono::weekday{i};
  }
  fail(errc::parse, "unknown weekday '" + std::string(name) + "'");
}

// All Monday..Friday dates in [first, last], ascending.
inline std::vector<Date> weekday_calendar(Date first, Date last) {
  require(first.ok() && last.ok(), errc::calendar, "invalid calendar bounds");
  require(first <= last, errc::calendar, "calendar range is empty (first > last)");
  std::vector<Date> out;
  for (auto d = to_days(first); d <= to_days(last); d += std::chrono::days{1}) {
    Date ymd = from_days(d);
    if (!is_weekend(ymd)) out.push_back(ymd);
  }
  return out;
}

}  // namespace illiq
