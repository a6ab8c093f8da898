#include "wxrec/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "wxrec/error.hpp"

namespace wxrec {
namespace {

namespace chr = std::chrono;

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::optional<Date> try_ymd(int y, int m, int d) {
  if (m < 1 || m > 12 || d < 1 || d > 31) return std::nullopt;
  chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(m)},
                          chr::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{chr::sys_days{ymd}.time_since_epoch().count()};
}

std::optional<Date> try_parse(std::string_view t) {
  int y = 0, m = 0, d = 0;
  if (auto slash = t.find('/'); slash != std::string_view::npos) {
    if (!parse_int(t.substr(0, slash), m) || !parse_int(t.substr(slash + 1), y)) return std::nullopt;
    return try_ymd(y, m, 1);
  }
  // Leading '-' would be a negative year; not supported.
  auto first = t.find('-');
  if (first == std::string_view::npos || first == 0) return std::nullopt;
  if (!parse_int(t.substr(0, first), y)) return std::nullopt;
  auto rest = t.substr(first + 1);
  auto second = rest.find('-');
  if (second == std::string_view::npos) {
    if (!parse_int(rest, m)) return std::nullopt;
    return try_ymd(y, m, 1);
  }
  if (!parse_int(rest.substr(0, second), m) || !parse_int(rest.substr(second + 1), d)) {
    return std::nullopt;
  }
  return try_ymd(y, m, d);
}

chr::year_month_day civil(Date d) { return chr::year_month_day{chr::sys_days{chr::days{d.days}}}; }

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  auto d = try_ymd(year, static_cast<int>(month), static_cast<int>(day));
  if (!d) throw Error(Errc::bad_date, "invalid calendar date");
  return *d;
}

int Date::year() const { return static_cast<int>(civil(*this).year()); }
unsigned Date::month() const { return static_cast<unsigned>(civil(*this).month()); }
unsigned Date::day() const { return static_cast<unsigned>(civil(*this).day()); }

Date parse_date(std::string_view text) {
  // Tolerate a trailing time component ("2020-07-01T00:00:00Z").
  if (auto t = text.find('T'); t != std::string_view::npos) text = text.substr(0, t);
  if (auto d = try_parse(text)) return *d;
  throw Error(Errc::bad_date, "unparseable date '" + std::string(text) + "'");
}

std::string to_iso(Date date) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", date.year(), date.month(), date.day());
  return buf;
}

Date today_utc() {
  auto now = chr::floor<chr::days>(chr::system_clock::now());
  return Date{now.time_since_epoch().count()};
}

std::optional<TimeUnits> parse_time_units(std::string_view units) {
  auto since = units.find(" since ");
  if (since == std::string_view::npos) return std::nullopt;
  auto unit = units.substr(0, since);
  while (!unit.empty() && unit.front() == ' ') unit.remove_prefix(1);

  TimeUnits out;
  if (unit == "days" || unit == "day" || unit == "d") {
    out.days_per_unit = 1.0;
  } else if (unit == "hours" || unit == "hour" || unit == "h") {
    out.days_per_unit = 1.0 / 24.0;
  } else if (unit == "minutes" || unit == "minute" || unit == "min") {
    out.days_per_unit = 1.0 / 1440.0;
  } else if (unit == "seconds" || unit == "second" || unit == "s") {
    out.days_per_unit = 1.0 / 86400.0;
  } else {
    return std::nullopt;
  }

  auto ref = units.substr(since + 7);
  while (!ref.empty() && ref.front() == ' ') ref.remove_prefix(1);
  auto end = ref.find_first_of(" T");
  auto date_part = ref.substr(0, end);
  // CF allows unpadded "1850-1-1".
  auto d = try_parse(date_part);
  if (!d) return std::nullopt;
  out.epoch = *d;
  return out;
}

}  // namespace wxrec
