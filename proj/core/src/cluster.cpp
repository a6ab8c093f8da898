#include "wxrec/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "wxrec/error.hpp"
#include "wxrec/forecast.hpp"

namespace wxrec::cluster {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

int nearest(std::span<const double> centroids, std::size_t k, std::size_t dims,
            std::span<const double> x, double& best_d) {
  int best = 0;
  best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = sq_dist(centroids.subspan(c * dims, dims), x);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double assign_all(const FeatureMatrix& f, std::span<const double> centroids, std::size_t k,
                  std::vector<int>& assignments) {
  double inertia = 0.0;
  for (std::size_t r = 0; r < f.rows(); ++r) {
    double d = 0.0;
    assignments[r] = nearest(centroids, k, f.cols(), f.row(r), d);
    inertia += d;
  }
  return inertia;
}

std::vector<double> init_plus_plus(const FeatureMatrix& f, std::size_t k, SeededUniform& rng) {
  const std::size_t n = f.rows();
  const std::size_t dims = f.cols();
  std::vector<double> centroids;
  centroids.reserve(k * dims);
  std::vector<bool> chosen(n, false);

  auto take = [&](std::size_t r) {
    chosen[r] = true;
    auto row = f.row(r);
    centroids.insert(centroids.end(), row.begin(), row.end());
  };
  take(std::min(n - 1, static_cast<std::size_t>(rng.next() * static_cast<double>(n))));

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    auto last = std::span<const double>(centroids).subspan((c - 1) * dims, dims);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], sq_dist(f.row(r), last));
      total += d2[r];
    }
    const double u = rng.next();
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = u * total;
      double cum = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (d2[r] <= 0.0) continue;
        cum += d2[r];
        pick = r;
        if (cum > target) break;
      }
    } else {
      // Every point coincides with a centroid; fall back to the first unused row.
      for (std::size_t r = 0; r < n && pick == n; ++r) {
        if (!chosen[r]) pick = r;
      }
    }
    take(pick);
  }
  return centroids;
}

}  // namespace

SeededUniform::SeededUniform(std::uint64_t seed) : engine_(seed) {}

double SeededUniform::next() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

FeatureMatrix FeatureMatrix::from_rows(const std::vector<std::vector<double>>& rows,
                                       std::vector<std::string> column_names) {
  FeatureMatrix f;
  const std::size_t ncols = column_names.size();
  f.raw_names = column_names;
  f.lon_count = 1;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != ncols) throw Error(Errc::dimension_mismatch, "ragged feature rows");
    f.cells.push_back({r, 0});
    f.raw.insert(f.raw.end(), rows[r].begin(), rows[r].end());
  }
  const std::size_t n = rows.size();
  std::vector<std::size_t> kept;
  for (std::size_t c = 0; c < ncols; ++c) {
    double mu = 0.0;
    for (std::size_t r = 0; r < n; ++r) mu += rows[r][c];
    mu /= std::max<double>(1.0, static_cast<double>(n));
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) ss += (rows[r][c] - mu) * (rows[r][c] - mu);
    const double sigma = n > 0 ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
    if (!(sigma > 1e-12 * std::max(1.0, std::abs(mu))) || !std::isfinite(sigma)) {
      f.dropped.push_back(column_names[c]);
      continue;
    }
    kept.push_back(c);
    f.names.push_back(column_names[c]);
    f.mu.push_back(mu);
    f.sigma.push_back(sigma);
  }
  f.data.reserve(n * kept.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t k = 0; k < kept.size(); ++k) {
      f.data.push_back((rows[r][kept[k]] - f.mu[k]) / f.sigma[k]);
    }
  }
  return f;
}

FeatureMatrix build_features(const store::StoreSnapshot& snapshot) {
  const auto temp = snapshot.variable_of_kind(store::VariableKind::temperature);
  const auto rain = snapshot.variable_of_kind(store::VariableKind::rainfall);
  if (snapshot.is_empty() || !temp || !rain) {
    throw Error(Errc::no_qualifying_cells, "clustering needs temperature and rainfall data");
  }

  std::vector<std::vector<double>> rows;
  std::vector<CellKey> cells, excluded;
  for (std::size_t c = 0; c < snapshot.cell_count(); ++c) {
    const CellKey cell = snapshot.cell_at(c);
    const auto ts = store::series(snapshot, cell, *temp);
    const auto rs = store::series(snapshot, cell, *rain);
    if (ts.empty() || rs.empty()) {
      excluded.push_back(cell);
      continue;
    }
    const auto tm = forecast::monthly_aggregates(ts);
    double tsum = 0.0;
    std::map<unsigned, std::pair<double, std::size_t>> clim;
    for (const auto& a : tm) {
      tsum += a.value;
      auto& [s, n] = clim[a.month];
      s += a.value;
      n += 1;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& [m, sn] : clim) {
      const double mean = sn.first / static_cast<double>(sn.second);
      lo = std::min(lo, mean);
      hi = std::max(hi, mean);
    }
    const auto rm = forecast::monthly_aggregates(rs);
    double rsum = 0.0;
    for (const auto& a : rm) rsum += a.value;
    const double rmean = rsum / static_cast<double>(rm.size());
    double rss = 0.0;
    for (const auto& a : rm) rss += (a.value - rmean) * (a.value - rmean);

    rows.push_back({tsum / static_cast<double>(tm.size()), hi - lo, rmean,
                    rss / static_cast<double>(rm.size())});
    cells.push_back(cell);
  }
  if (rows.empty()) {
    throw Error(Errc::no_qualifying_cells, "no cell has both temperature and rainfall");
  }
  FeatureMatrix f = FeatureMatrix::from_rows(
      rows, {"mean_temperature", "temperature_amplitude", "mean_rainfall", "rainfall_variance"});
  f.cells = std::move(cells);
  f.excluded = std::move(excluded);
  f.lon_count = snapshot.lons().size();
  return f;
}

ClusterModel kmeans_fit(const FeatureMatrix& f, std::size_t k, std::uint64_t seed,
                        const KmeansOptions& options) {
  const std::size_t n = f.rows();
  if (n == 0) throw Error(Errc::degenerate_features, "no feature rows");
  if (k == 0) throw Error(Errc::invalid_argument, "k must be at least 1");
  if (k > n) {
    throw Error(Errc::k_too_large,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " rows");
  }
  const std::size_t dims = f.cols();

  SeededUniform rng(seed);
  ClusterModel m;
  m.k = k;
  m.dims = dims;
  m.seed = seed;
  m.centroids = init_plus_plus(f, k, rng);
  m.assignments.assign(n, 0);

  std::vector<double> sums(k * dims);
  std::vector<std::size_t> counts(k);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    m.inertia_history.push_back(assign_all(f, m.centroids, k, m.assignments));
    m.iterations = iter;

    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto c = static_cast<std::size_t>(m.assignments[r]);
      auto row = f.row(r);
      for (std::size_t d = 0; d < dims; ++d) sums[c * dims + d] += row[d];
      counts[c] += 1;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // an empty cluster keeps its centroid
      double moved = 0.0;
      for (std::size_t d = 0; d < dims; ++d) {
        const double next = sums[c * dims + d] / static_cast<double>(counts[c]);
        const double delta = next - m.centroids[c * dims + d];
        moved += delta * delta;
        m.centroids[c * dims + d] = next;
      }
      shift = std::max(shift, std::sqrt(moved));
    }
    if (shift < options.tolerance) break;
  }
  m.inertia = assign_all(f, m.centroids, k, m.assignments);
  m.inertia_history.push_back(m.inertia);
  return m;
}

int assign(const ClusterModel& model, std::span<const double> vector) {
  if (vector.size() != model.dims) {
    throw Error(Errc::dimension_mismatch, "vector has " + std::to_string(vector.size()) +
                                              " components, model expects " +
                                              std::to_string(model.dims));
  }
  double d = 0.0;
  return nearest(model.centroids, model.k, model.dims, vector, d);
}

std::string to_json(const ClusterModel& model, const FeatureMatrix& f) {
  using nlohmann::json;
  json j;
  j["k"] = model.k;
  j["feature_names"] = f.names;
  j["dropped_features"] = f.dropped;
  j["mu"] = f.mu;
  j["sigma"] = f.sigma;
  json cents = json::array();
  for (std::size_t c = 0; c < model.k; ++c) {
    auto row = model.centroid(c);
    cents.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["centroids"] = std::move(cents);
  json assignments = json::object();
  for (std::size_t r = 0; r < f.rows() && r < model.assignments.size(); ++r) {
    const std::size_t index = f.cells[r].lat_idx * f.lon_count + f.cells[r].lon_idx;
    assignments[std::to_string(index)] = model.assignments[r];
  }
  j["assignments"] = std::move(assignments);
  j["inertia"] = model.inertia;
  j["seed"] = model.seed;
  j["iterations"] = model.iterations;
  return j.dump();
}

}  // namespace wxrec::cluster
