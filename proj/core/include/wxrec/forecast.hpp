#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wxrec/calendar.hpp"
#include "wxrec/geo.hpp"
#include "wxrec/store.hpp"

namespace wxrec::forecast {

using store::CellSeries;
using store::StoreSnapshot;

/// Beyond this many days past the last observation, persistence is not used.
inline constexpr int kPersistenceHorizonDays = 3;

enum class Method { persistence, climatology, trend };

std::string_view to_string(Method m);

struct DatedValue {
  Date date;
  double value = 0.0;
};

struct MonthlyStats {
  unsigned month = 1;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t n = 0;
};

struct TrendFit {
  double slope = 0.0;      // units per year
  double intercept = 0.0;  // value at year 0
  std::size_t n = 0;
  unsigned month = 1;
};

struct TrendProjection {
  double value = 0.0;
  TrendFit fit;
};

/// One calendar month of one year reduced to a single value: the mean for
/// temperature and pressure, the total for rainfall.
struct MonthlyAggregate {
  int year = 0;
  unsigned month = 1;
  double value = 0.0;
  std::size_t samples = 0;
  Date last;
};

std::vector<MonthlyAggregate> monthly_aggregates(const CellSeries& series);

/// `horizon_days` entries on consecutive days after the last observation,
/// each carrying the last observed value.
std::vector<DatedValue> persistence_forecast(const CellSeries& series, int horizon_days);

/// Mean and population stddev of the monthly aggregates falling in `month`.
MonthlyStats climatology(const CellSeries& series, unsigned month);

/// Least-squares line through (year, monthly aggregate) for `month`,
/// evaluated at `target_year`. Rainfall projections are clamped at zero.
TrendProjection trend_projection(const CellSeries& series, unsigned month, int target_year);

/// Ordinary least squares y = intercept + slope * x. Requires two distinct x.
TrendFit fit_line(std::span<const double> x, std::span<const double> y);

struct Basis {
  std::size_t count = 0;
  std::optional<Date> first;
  std::optional<Date> last;
};

struct ForecastReport {
  GeoPoint point;
  CellKey cell;
  double cell_lat = 0.0;
  double cell_lon = 0.0;
  std::string variable;
  store::VariableKind kind = store::VariableKind::other;
  std::string units;
  Date target;
  double value = 0.0;
  Method method = Method::persistence;
  Basis basis;
  std::optional<TrendFit> trend;  // present for trend forecasts
};

/// Dispatch for one cell:
///   target - last_obs <= 3 days   -> persistence (latest obs on/before target)
///   target year <= last year + 1  -> climatology mean of the target month
///   otherwise                     -> trend projection
/// A trend regime with fewer than two usable years falls back to
/// climatology. Throws Error(no_data) when the chosen regime has nothing.
ForecastReport forecast_cell(const StoreSnapshot& snapshot, CellKey cell, Date target,
                             std::string_view variable);

/// forecast_cell at the cell nearest to `point`.
ForecastReport forecast_at(const StoreSnapshot& snapshot, const GeoPoint& point, Date target,
                           std::string_view variable);

/// A full grid of per-cell forecasts; cells without data are masked.
struct GridField {
  std::string variable;
  store::VariableKind kind = store::VariableKind::other;
  Date date;
  std::vector<double> lats;
  std::vector<double> lons;
  std::vector<double> values;      // lat-major
  std::vector<std::uint8_t> mask;  // 1 = no forecast
};

GridField forecast_field(const StoreSnapshot& snapshot, std::string_view variable, Date target);

}  // namespace wxrec::forecast
