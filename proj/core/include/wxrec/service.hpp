#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>

#include "wxrec/calendar.hpp"
#include "wxrec/cluster.hpp"
#include "wxrec/forecast.hpp"
#include "wxrec/provider.hpp"
#include "wxrec/recsys.hpp"
#include "wxrec/render.hpp"
#include "wxrec/router.hpp"
#include "wxrec/store.hpp"

namespace wxrec::service {

namespace fs = std::filesystem;

struct ProviderConfig {
  enum class Mode { off, replay };
  Mode mode = Mode::off;
  fs::path fixture_dir;
  double interval_s = 60.0;
  provider::Region region;
};

struct ApiConfig {
  std::string listen_address = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  fs::path snapshot_dir;
  fs::path graph_path;      // optional; /v1/route answers 503 without it
  fs::path matrix_path;     // interactions (JSON lines); may not exist yet
  fs::path locations_path;  // JSON array of {id, lat, lon}
  fs::path ui_dir;          // static client, mounted under /ui when set
  router::WeatherWeights weights;
  recsys::RecommendOptions recommend;
  std::uint64_t cluster_seed = 42;
  std::size_t render_scale = 4;
  ProviderConfig provider;

  /// Port range, weights, and that every configured input path exists.
  /// Throws Error(bad_config).
  void validate() const;
};

/// Relative paths are resolved against `base_dir`. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
ApiConfig parse_config(std::string_view json_text, const fs::path& base_dir);

/// Reads the file, then applies WXREC_LISTEN ("host:port") and
/// WXREC_DATA_DIR (snapshot directory) from the environment.
ApiConfig load_config(const fs::path& path);
void apply_env_overrides(ApiConfig& config);

// --- serializers shared by the CLI and the HTTP API -----------------------

std::string report_json(const forecast::ForecastReport& report, bool pretty = false);
std::string route_json(const router::RouteResult& route, bool pretty = false);
std::string recommendations_json(const recsys::InteractionMatrix& m, std::string_view user,
                                 const recsys::RecommendOptions& options, Date date,
                                 const std::vector<recsys::Recommendation>& recs,
                                 bool pretty = false);
/// {variable, kind, date, lats, lons, values (null when masked), mask, lo, hi}
std::string grid_json(const forecast::GridField& field, bool pretty = false);
std::string error_json(std::string_view code, std::string_view message);

/// Palette for a variable kind: rain for rainfall, thermal otherwise.
const render::Palette& palette_for(store::VariableKind kind);

struct GridRender {
  forecast::GridField field;
  render::RasterImage image;
  render::Sidecar sidecar;
};

/// The forecast grid for (variable, date) as a raster. Without an explicit
/// range the unmasked min/max is used. The CLI `render` command and
/// /v1/grid?format=ppm both go through here so their bytes agree.
GridRender render_forecast_grid(const store::StoreSnapshot& snapshot, std::string_view variable,
                                Date date, std::size_t scale,
                                std::optional<std::pair<double, double>> range = std::nullopt);

struct ClusterResult {
  cluster::FeatureMatrix features;
  cluster::ClusterModel model;
  std::string json;
};

ClusterResult fit_clusters(const store::StoreSnapshot& snapshot, std::size_t k, std::uint64_t seed);

/// Cluster ids on the snapshot grid; cells without features are missing.
render::RasterImage render_clusters(const store::StoreSnapshot& snapshot, const ClusterResult& c,
                                    std::size_t scale);

// --- request handling ------------------------------------------------------

struct ApiRequest {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::uint64_t snapshot_version = 0;  // sent as X-Snapshot-Version
};

/// Everything the service reads at startup; tests build these directly.
struct Resources {
  store::SnapshotPtr snapshot = store::StoreSnapshot::empty();
  std::optional<router::RoadGraph> graph;
  recsys::InteractionMatrix matrix;
};

Resources load_resources(const ApiConfig& config);

using LogSink = std::function<void(std::string_view)>;

class Service {
 public:
  Service(ApiConfig config, Resources resources);
  explicit Service(const ApiConfig& config) : Service(config, load_resources(config)) {}
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Thread-safe. Every response is computed against a single snapshot.
  ApiResponse handle(const ApiRequest& request);

  const ApiConfig& config() const { return config_; }
  store::Store& store() { return store_; }
  std::shared_ptr<const recsys::InteractionMatrix> matrix() const;

  void set_log_sink(LogSink sink);

  /// One provider poll: ingest the next fixture batch, publish, and persist
  /// the snapshot. Returns the new version, or nullopt when nothing was new.
  std::optional<std::uint64_t> poll_once();

  /// Starts the background poller when the provider mode is replay.
  void start_provider();
  void stop_provider();

 private:
  ApiResponse forecast(const ApiRequest& req, const store::SnapshotPtr& snap);
  ApiResponse route(const ApiRequest& req, const store::SnapshotPtr& snap);
  ApiResponse recommendations(const ApiRequest& req, const store::SnapshotPtr& snap);
  ApiResponse interactions(const ApiRequest& req);
  ApiResponse grid(const ApiRequest& req, const store::SnapshotPtr& snap);
  ApiResponse clusters(const ApiRequest& req, const store::SnapshotPtr& snap);
  void log(std::string_view line);

  ApiConfig config_;
  store::Store store_;
  std::optional<router::RoadGraph> graph_;

  mutable std::mutex matrix_mutex_;  // guards the pointer only
  std::mutex matrix_writer_;         // serializes interaction writes
  std::shared_ptr<const recsys::InteractionMatrix> matrix_;

  using ClusterKey = std::tuple<std::uint64_t, std::size_t, std::uint64_t>;
  std::mutex cluster_mutex_;
  std::map<ClusterKey, std::shared_ptr<const ClusterResult>> cluster_cache_;

  std::mutex log_mutex_;
  LogSink log_sink_;

  std::mutex poll_mutex_;
  std::unique_ptr<provider::ProviderClient> provider_;
  std::condition_variable_any poll_cv_;
  std::jthread poller_;
};

/// Plain HTTP front end for a Service (plus the static client under /ui).
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds without serving yet; returns the bound port. Throws Error(bad_config).
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace wxrec::service
