#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace wxrec {

/// A civil (proleptic Gregorian, UTC) date stored as days since 1970-01-01.
struct Date {
  std::int64_t days = 0;

  static Date from_ymd(int year, unsigned month, unsigned day);

  int year() const;
  unsigned month() const;
  unsigned day() const;

  Date operator+(std::int64_t n) const { return Date{days + n}; }
  Date operator-(std::int64_t n) const { return Date{days - n}; }
  std::int64_t operator-(Date other) const { return days - other.days; }

  auto operator<=>(const Date&) const = default;
};

/// Accepts `YYYY-MM-DD`, `YYYY-MM` (first of month) and `M/YYYY` (first of
/// month). Throws Error(bad_date) otherwise.
Date parse_date(std::string_view text);

std::string to_iso(Date date);

/// Current UTC date.
Date today_utc();

/// Decoded CF-style time units such as "days since 1850-01-01 00:00:00".
struct TimeUnits {
  Date epoch;
  double days_per_unit = 1.0;
};

/// Returns nullopt for units this library does not understand (calendar
/// months/years, unparseable reference dates).
std::optional<TimeUnits> parse_time_units(std::string_view units);

}  // namespace wxrec
