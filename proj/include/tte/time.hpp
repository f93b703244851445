#pragma once

// UTC timestamps at second resolution, ISO-8601 parsing and formatting.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace tte {

using Timestamp = std::chrono::sys_seconds;

namespace detail {

inline bool read_digits(std::string_view s, std::size_t pos, std::size_t count,
                        int *out) {
  if (pos + count > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    v = v * 10 + (s[i] - '0');
  }
  *out = v;
  return true;
}

}  // namespace detail

// Accepts "YYYY-MM-DDTHH:MM:SS" with 'T' or ' ' as separator, optional
// fractional seconds (truncated), and an optional "Z" or "+HH:MM" / "-HH:MM"
// offset. Offsets are folded into UTC.
inline std::optional<Timestamp> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  int y, mo, d, h, mi, sec;
  if (!detail::read_digits(s, 0, 4, &y) || s.size() < 19 || s[4] != '-' ||
      !detail::read_digits(s, 5, 2, &mo) || s[7] != '-' ||
      !detail::read_digits(s, 8, 2, &d) || (s[10] != 'T' && s[10] != ' ') ||
      !detail::read_digits(s, 11, 2, &h) || s[13] != ':' ||
      !detail::read_digits(s, 14, 2, &mi) || s[16] != ':' ||
      !detail::read_digits(s, 17, 2, &sec)) {
    return std::nullopt;
  }
  if (h > 23 || mi > 59 || sec > 59) return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                     day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t begin = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == begin) return std::nullopt;
  }
  seconds offset{0};
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh, om;
      if (!detail::read_digits(s, pos + 1, 2, &oh)) return std::nullopt;
      std::size_t mpos = pos + 3;
      if (mpos < s.size() && s[mpos] == ':') ++mpos;
      if (!detail::read_digits(s, mpos, 2, &om)) return std::nullopt;
      if (oh > 23 || om > 59) return std::nullopt;
      offset = hours{oh} + minutes{om};
      if (s[pos] == '-') offset = -offset;
      pos = mpos + 2;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  Timestamp local = sys_days{ymd} + hours{h} + minutes{mi} + seconds{sec};
  return local - offset;
}

inline std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const sys_days day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss<seconds> tod{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()),
                static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

// Signed fractional hours from `from` to `to`.
inline double hours_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / 3600.0;
}

// Rounds to two decimals of an hour, computed from whole seconds so that a
// shift of exactly one hour shifts the result by exactly 100 hundredths.
inline double round_hours_2dp(std::chrono::seconds diff) {
  return std::round(static_cast<double>(diff.count()) / 36.0) / 100.0;
}

inline double round_2dp(double hours) { return std::round(hours * 100.0) / 100.0; }

}  // namespace tte
