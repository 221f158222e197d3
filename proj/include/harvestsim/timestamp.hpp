#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string_view>

#include "harvestsim/csv.hpp"

namespace harvestsim {

namespace detail {

inline bool take_digits(std::string_view& s, int n, int& out) {
  if (s.size() < static_cast<std::size_t>(n)) return false;
  int v = 0;
  for (int i = 0; i < n; ++i) {
    char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  s.remove_prefix(n);
  return true;
}

inline bool take_char(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

inline std::optional<double> parse_iso8601(std::string_view s) {
  using namespace std::chrono;
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0, ss = 0;
  double frac = 0.0;
  if (!take_digits(s, 4, y) || !take_char(s, '-') || !take_digits(s, 2, mo) ||
      !take_char(s, '-') || !take_digits(s, 2, d))
    return std::nullopt;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  if (!s.empty()) {
    if (!take_char(s, 'T') && !take_char(s, ' ')) return std::nullopt;
    if (!take_digits(s, 2, hh) || !take_char(s, ':') || !take_digits(s, 2, mm)) return std::nullopt;
    if (take_char(s, ':')) {
      if (!take_digits(s, 2, ss)) return std::nullopt;
      if (take_char(s, '.')) {
        double scale = 0.1;
        std::size_t n = 0;
        while (n < s.size() && s[n] >= '0' && s[n] <= '9') {
          frac += (s[n] - '0') * scale;
          scale /= 10;
          ++n;
        }
        if (n == 0) return std::nullopt;
        s.remove_prefix(n);
      }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  }
  int offset_min = 0;
  if (take_char(s, 'Z')) {
  } else if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    int sign = s.front() == '-' ? -1 : 1;
    s.remove_prefix(1);
    int oh = 0, om = 0;
    if (!take_digits(s, 2, oh)) return std::nullopt;
    take_char(s, ':');
    if (!s.empty() && !take_digits(s, 2, om)) return std::nullopt;
    offset_min = sign * (oh * 60 + om);
  }
  if (!s.empty()) return std::nullopt;
  auto days_since_epoch = sys_days{ymd}.time_since_epoch().count();
  return static_cast<double>(days_since_epoch) * 86400.0 + hh * 3600.0 + mm * 60.0 + ss + frac -
         offset_min * 60.0;
}

}  // namespace detail

// Accepts epoch seconds ("1690848000", "60.5") or ISO-8601 date-times in UTC or
// with a numeric offset ("2023-08-01T12:00:00Z", "2023-08-01 12:00", "2023-08-01T12:00+02:00").
inline std::optional<double> parse_timestamp(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.size() >= 10 && s[4] == '-' && s[7] == '-') return detail::parse_iso8601(s);
  auto v = csv::parse_number(s);
  if (v && !std::isfinite(*v)) return std::nullopt;
  return v;
}

// Calendar month (1..12, UTC) of an epoch timestamp.
inline unsigned month_of(double epoch_seconds) {
  using namespace std::chrono;
  auto days = static_cast<long long>(std::floor(epoch_seconds / 86400.0));
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  return static_cast<unsigned>(ymd.month());
}

}  // namespace harvestsim
