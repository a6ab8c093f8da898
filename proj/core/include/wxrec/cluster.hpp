#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wxrec/geo.hpp"
#include "wxrec/store.hpp"

namespace wxrec::cluster {

/// Climate features per grid cell, standardized per column. Columns with
/// zero spread are dropped (and listed) since they carry no information.
struct FeatureMatrix {
  std::vector<CellKey> cells;              // row order
  std::vector<CellKey> excluded;           // cells missing a variable
  std::vector<std::string> names;          // kept columns
  std::vector<std::string> dropped;        // zero-variance columns
  std::vector<double> mu;                  // per kept column
  std::vector<double> sigma;               // per kept column
  std::vector<double> raw;                 // rows x all candidate columns, unstandardized
  std::vector<std::string> raw_names;      // names of `raw` columns
  std::vector<double> data;                // rows x names.size(), standardized
  std::size_t lon_count = 0;               // grid width, for cell-index export

  std::size_t rows() const { return cells.size(); }
  std::size_t cols() const { return names.size(); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data).subspan(r * cols(), cols());
  }

  /// Standardizes arbitrary rows (used by tests and benchmarks).
  static FeatureMatrix from_rows(const std::vector<std::vector<double>>& rows,
                                 std::vector<std::string> column_names);
};

/// Rows for every cell holding both temperature and rainfall:
/// mean temperature, seasonal amplitude (max - min climatological monthly
/// mean), mean monthly rainfall total, variance of monthly totals.
/// Throws Error(no_qualifying_cells).
FeatureMatrix build_features(const store::StoreSnapshot& snapshot);

struct KmeansOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;  // max centroid shift, standardized units
};

struct ClusterModel {
  std::size_t k = 0;
  std::size_t dims = 0;
  std::vector<double> centroids;  // k x dims
  std::vector<int> assignments;   // per feature row
  double inertia = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<double> inertia_history;  // after every assignment step

  std::span<const double> centroid(std::size_t c) const {
    return std::span<const double>(centroids).subspan(c * dims, dims);
  }
};

/// k-means++ seeding followed by Lloyd iterations. Deterministic in
/// (features, k, seed). Throws Error(k_too_large) / Error(degenerate_features).
ClusterModel kmeans_fit(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                        const KmeansOptions& options = {});

/// Nearest centroid by Euclidean distance; ties go to the lower id.
int assign(const ClusterModel& model, std::span<const double> vector);

/// JSON export: {k, feature_names, dropped_features, mu, sigma, centroids,
/// assignments (cell index -> id), inertia, seed, iterations}.
std::string to_json(const ClusterModel& model, const FeatureMatrix& features);

/// Deterministic generator for seeding: raw mt19937_64 output mapped to
/// [0, 1) with 53 bits, so results do not depend on the standard library's
/// distribution implementations.
class SeededUniform {
 public:
  explicit SeededUniform(std::uint64_t seed);
  double next();

 private:
  std::mt19937_64 engine_;
};

}  // namespace wxrec::cluster
