#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "dsm/error.hpp"

namespace dsm {

using date = std::chrono::sys_days;
using timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  auto first = s.data() + pos;
  auto last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace detail

// Strict YYYY-MM-DD.
inline date parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-' || !detail::read_int(s, 0, 4, y) ||
      !detail::read_int(s, 5, 2, m) || !detail::read_int(s, 8, 2, d)) {
    throw validation_error("bad date '" + std::string(s) + "', expected YYYY-MM-DD");
  }
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw validation_error("invalid calendar date '" + std::string(s) + "'");
  return date{ymd};
}

// YYYY-MM-DDTHH:MM:SSZ (UTC only) or a bare date, which means midnight.
inline timestamp parse_timestamp(std::string_view s) {
  if (s.size() == 10) return timestamp{parse_date(s)};
  int hh = 0, mm = 0, ss = 0;
  if (s.size() != 20 || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z' ||
      !detail::read_int(s, 11, 2, hh) || !detail::read_int(s, 14, 2, mm) ||
      !detail::read_int(s, 17, 2, ss) || hh > 23 || mm > 59 || ss > 59) {
    throw validation_error("bad timestamp '" + std::string(s) + "', expected YYYY-MM-DDTHH:MM:SSZ");
  }
  return timestamp{parse_date(s.substr(0, 10))} + std::chrono::hours{hh} +
         std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

// HH:MM as an offset from midnight.
inline std::chrono::minutes parse_time_of_day(std::string_view s) {
  int hh = 0, mm = 0;
  if (s.size() != 5 || s[2] != ':' || !detail::read_int(s, 0, 2, hh) ||
      !detail::read_int(s, 3, 2, mm) || hh > 23 || mm > 59) {
    throw validation_error("bad time of day '" + std::string(s) + "', expected HH:MM");
  }
  return std::chrono::hours{hh} + std::chrono::minutes{mm};
}

inline std::string format_date(date d) {
  std::chrono::year_month_day ymd{d};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::string format_timestamp(timestamp t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  std::chrono::hh_mm_ss hms{t - day};
  char buf[64];
  std::snprintf(buf, sizeof buf, "T%02ld:%02ld:%02ldZ", static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()), static_cast<long>(hms.seconds().count()));
  return format_date(date{day}) + buf;
}

inline std::string format_time_of_day(std::chrono::minutes m) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02ld:%02ld", static_cast<long>(m.count() / 60),
                static_cast<long>(m.count() % 60));
  return buf;
}

inline date day_of(timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

// Inclusive date range.
struct date_range {
  date first;
  date last;

  bool contains(date d) const noexcept { return first <= d && d <= last; }
  long days() const noexcept { return (last - first).count() + 1; }
};

}  // namespace dsm
