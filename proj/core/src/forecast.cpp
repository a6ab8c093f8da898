#include "wxrec/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wxrec/error.hpp"

namespace wxrec::forecast {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::persistence: return "persistence";
    case Method::climatology: return "climatology";
    case Method::trend: return "trend";
  }
  return "persistence";
}

std::vector<MonthlyAggregate> monthly_aggregates(const CellSeries& series) {
  const bool total = series.kind == store::VariableKind::rainfall;
  std::map<std::pair<int, unsigned>, MonthlyAggregate> by_month;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Date d = series.times[k];
    auto& agg = by_month[{d.year(), d.month()}];
    agg.year = d.year();
    agg.month = d.month();
    agg.value += series.values[k];
    agg.samples += 1;
    agg.last = d;  // series is time-ordered
  }
  std::vector<MonthlyAggregate> out;
  out.reserve(by_month.size());
  for (auto& [key, agg] : by_month) {
    if (!total) agg.value /= static_cast<double>(agg.samples);
    out.push_back(agg);
  }
  return out;
}

std::vector<DatedValue> persistence_forecast(const CellSeries& series, int horizon_days) {
  if (series.empty()) throw Error(Errc::no_data, "persistence needs at least one observation");
  if (horizon_days < 1) throw Error(Errc::invalid_argument, "horizon must be positive");
  const Date last = series.times.back();
  const double value = series.values.back();
  std::vector<DatedValue> out;
  out.reserve(static_cast<std::size_t>(horizon_days));
  for (int h = 1; h <= horizon_days; ++h) out.push_back({last + h, value});
  return out;
}

MonthlyStats climatology(const CellSeries& series, unsigned month) {
  if (series.empty()) throw Error(Errc::no_data, "empty series");
  std::vector<double> xs;
  for (const auto& agg : monthly_aggregates(series)) {
    if (agg.month == month) xs.push_back(agg.value);
  }
  if (xs.empty()) {
    throw Error(Errc::no_data, "no observations in month " + std::to_string(month));
  }
  MonthlyStats s;
  s.month = month;
  s.n = xs.size();
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  // Clamp to the sample range; summation rounding can push it a hair outside.
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  s.mean = std::clamp(s.mean, *lo, *hi);
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.stddev = s.n == 1 ? 0.0 : std::sqrt(ss / static_cast<double>(s.n));
  return s;
}

TrendFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error(Errc::invalid_argument, "x and y differ in length");
  if (n < 2) throw Error(Errc::insufficient_years, "need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(Errc::insufficient_years, "need two distinct years");
  TrendFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

TrendProjection trend_projection(const CellSeries& series, unsigned month, int target_year) {
  std::vector<double> years, values;
  for (const auto& agg : monthly_aggregates(series)) {
    if (agg.month != month) continue;
    years.push_back(static_cast<double>(agg.year));
    values.push_back(agg.value);
  }
  if (years.size() < 2) {
    throw Error(Errc::insufficient_years, "trend needs at least two years of month " +
                                              std::to_string(month));
  }
  TrendProjection p;
  p.fit = fit_line(years, values);
  p.fit.month = month;
  // Evaluate around the data centroid for accuracy far from year 0.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    mx += years[i];
    my += values[i];
  }
  mx /= static_cast<double>(years.size());
  my /= static_cast<double>(years.size());
  p.value = my + p.fit.slope * (static_cast<double>(target_year) - mx);
  if (series.kind == store::VariableKind::rainfall) p.value = std::max(0.0, p.value);
  return p;
}

namespace {

ForecastReport climatology_report(ForecastReport r, const CellSeries& s) {
  const MonthlyStats stats = climatology(s, r.target.month());
  r.method = Method::climatology;
  r.value = stats.mean;
  r.basis.count = stats.n;
  for (const auto& agg : monthly_aggregates(s)) {
    if (agg.month != r.target.month()) continue;
    if (!r.basis.first) r.basis.first = Date::from_ymd(agg.year, agg.month, 1);
    r.basis.last = agg.last;
  }
  return r;
}

}  // namespace

ForecastReport forecast_cell(const StoreSnapshot& snapshot, CellKey cell, Date target,
                             std::string_view variable) {
  if (snapshot.is_empty()) throw Error(Errc::empty_store, "store is empty");
  const std::string name = snapshot.resolve_variable(variable);
  const CellSeries s = store::series(snapshot, cell, name);

  ForecastReport r;
  r.cell = cell;
  r.cell_lat = snapshot.lats()[cell.lat_idx];
  r.cell_lon = snapshot.lons()[cell.lon_idx];
  r.point = GeoPoint(r.cell_lat, r.cell_lon);
  r.variable = name;
  r.kind = s.kind;
  r.units = snapshot.column(name).info.units;
  r.target = target;
  if (s.empty()) throw Error(Errc::no_data, "no observations of '" + name + "' at this cell");

  const Date last = s.times.back();
  if (target - last <= kPersistenceHorizonDays) {
    auto it = std::upper_bound(s.times.begin(), s.times.end(), target);
    if (it != s.times.begin()) {
      const auto k = static_cast<std::size_t>(it - s.times.begin()) - 1;
      r.method = Method::persistence;
      r.value = s.values[k];
      r.basis = {1, s.times[k], s.times[k]};
      return r;
    }
    // Target precedes every observation: nothing to persist.
    return climatology_report(std::move(r), s);
  }
  if (target.year() <= last.year() + 1) return climatology_report(std::move(r), s);

  try {
    const TrendProjection p = trend_projection(s, target.month(), target.year());
    r.method = Method::trend;
    r.value = p.value;
    r.trend = p.fit;
    r.basis.count = p.fit.n;
    for (const auto& agg : monthly_aggregates(s)) {
      if (agg.month != target.month()) continue;
      if (!r.basis.first) r.basis.first = Date::from_ymd(agg.year, agg.month, 1);
      r.basis.last = agg.last;
    }
    return r;
  } catch (const Error& e) {
    if (e.code() != Errc::insufficient_years) throw;
    return climatology_report(std::move(r), s);
  }
}

ForecastReport forecast_at(const StoreSnapshot& snapshot, const GeoPoint& point, Date target,
                           std::string_view variable) {
  const CellKey cell = store::nearest_cell(snapshot, point);
  ForecastReport r = forecast_cell(snapshot, cell, target, variable);
  r.point = point;
  return r;
}

GridField forecast_field(const StoreSnapshot& snapshot, std::string_view variable, Date target) {
  if (snapshot.is_empty()) throw Error(Errc::empty_store, "store is empty");
  GridField g;
  g.variable = snapshot.resolve_variable(variable);
  g.kind = snapshot.column(g.variable).info.kind;
  g.date = target;
  g.lats = snapshot.lats();
  g.lons = snapshot.lons();
  g.values.assign(snapshot.cell_count(), 0.0);
  g.mask.assign(snapshot.cell_count(), 1);
  for (std::size_t c = 0; c < snapshot.cell_count(); ++c) {
    try {
      const auto r = forecast_cell(snapshot, snapshot.cell_at(c), target, g.variable);
      g.values[c] = r.value;
      g.mask[c] = 0;
    } catch (const Error& e) {
      if (e.code() != Errc::no_data) throw;
    }
  }
  return g;
}

}  // namespace wxrec::forecast
