#include "wxrec/service.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "wxrec/error.hpp"

namespace wxrec::service {
namespace {

using json = nlohmann::json;

// An error that already knows its HTTP shape.
struct HttpError {
  int status;
  std::string code;
  std::string message;
};

std::string dump(const json& j, bool pretty) { return pretty ? j.dump(2) : j.dump(); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::bad_config, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int status_for(Errc code) {
  switch (code) {
    case Errc::bad_coords:
    case Errc::bad_date:
    case Errc::unknown_variable:
    case Errc::invalid_argument:
    case Errc::non_positive_weight:
    case Errc::k_too_large:
    case Errc::degenerate_range:
    case Errc::negative_precip:
      return 400;
    case Errc::no_data:
    case Errc::no_route:
    case Errc::unknown_user:
    case Errc::unknown_location:
    case Errc::insufficient_years:
    case Errc::empty_field:
    case Errc::no_qualifying_cells:
    case Errc::degenerate_features:
      return 404;
    case Errc::empty_store:
    case Errc::empty_graph:
      return 503;
    default:
      return 500;
  }
}

const std::string& require(const ApiRequest& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) {
    throw HttpError{400, "missing_param", "query parameter '" + key + "' is required"};
  }
  return it->second;
}

std::optional<std::string> optional_param(const ApiRequest& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

double parse_double(const std::string& text, const std::string& key, const char* code) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw HttpError{400, code, "parameter '" + key + "' is not a number"};
  }
  return v;
}

std::uint64_t parse_count(const std::string& text, const std::string& key) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw HttpError{400, "bad_param", "parameter '" + key + "' is not a non-negative integer"};
  }
  return v;
}

GeoPoint point_param(const ApiRequest& req, const std::string& lat_key, const std::string& lon_key) {
  const double lat = parse_double(require(req, lat_key), lat_key, "bad_coords");
  const double lon = parse_double(require(req, lon_key), lon_key, "bad_coords");
  return GeoPoint(lat, lon);
}

void require_store(const store::SnapshotPtr& snap) {
  if (snap->is_empty()) throw HttpError{503, "empty_store", "no snapshot has been published"};
}

std::string format_param(const ApiRequest& req) {
  const std::string f = optional_param(req, "format").value_or("json");
  if (f != "json" && f != "ppm") throw HttpError{400, "bad_param", "format must be json or ppm"};
  return f;
}

json point_json(const GeoPoint& p) { return {{"lat", p.lat()}, {"lon", p.lon()}}; }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_atomically(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << data;
    out.flush();
    if (!out) throw Error(Errc::snapshot_io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

// --- config ------------------------------------------------------------------

void ApiConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(Errc::bad_config, "port out of range");
  if (listen_address.empty()) throw Error(Errc::bad_config, "listen address is empty");
  auto must_exist = [](const fs::path& p, const char* what) {
    if (!p.empty() && !fs::exists(p)) {
      throw Error(Errc::bad_config, std::string(what) + " does not exist: " + p.string());
    }
  };
  must_exist(snapshot_dir, "snapshot directory");
  must_exist(graph_path, "road graph");
  must_exist(locations_path, "locations file");
  must_exist(ui_dir, "ui directory");
  if (!matrix_path.empty()) {
    if (locations_path.empty()) throw Error(Errc::bad_config, "matrix_path needs locations_path");
    const auto parent = matrix_path.parent_path();
    must_exist(parent, "matrix directory");
  }
  if (provider.mode == ProviderConfig::Mode::replay) {
    if (provider.fixture_dir.empty() || !fs::is_directory(provider.fixture_dir)) {
      throw Error(Errc::bad_config, "replay provider needs an existing fixture_dir");
    }
    if (!(provider.interval_s > 0.0)) throw Error(Errc::bad_config, "interval_s must be > 0");
  }
  if (render_scale < 1 || render_scale > 64) throw Error(Errc::bad_config, "render_scale out of range");
  if (recommend.n < 1 || recommend.k < 1) throw Error(Errc::bad_config, "recommend n and k must be >= 1");
  if (!(recommend.lambda >= 0.0 && recommend.lambda <= 1.0)) {
    throw Error(Errc::bad_config, "recommend lambda must lie in [0, 1]");
  }
  try {
    weights.validate();
  } catch (const Error& e) {
    throw Error(Errc::bad_config, e.what());
  }
}

ApiConfig parse_config(std::string_view json_text, const fs::path& base_dir) {
  ApiConfig c;
  auto path_of = [&](const json& v) -> fs::path {
    fs::path p = v.get<std::string>();
    if (p.empty() || p.is_absolute()) return p;
    return base_dir / p;
  };
  auto check_keys = [](const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    if (!obj.is_object()) throw Error(Errc::bad_config, std::string(where) + " must be an object");
    for (const auto& [k, _] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) throw Error(Errc::bad_config, "unknown key '" + k + "' in " + where);
    }
  };
  try {
    const json j = json::parse(json_text);
    check_keys(j,
               {"listen_address", "port", "snapshot_dir", "graph_path", "matrix_path",
                "locations_path", "ui_dir", "router", "recommend", "cluster_seed", "render_scale",
                "provider"},
               "config");
    c.listen_address = j.value("listen_address", c.listen_address);
    c.port = j.value("port", c.port);
    if (j.contains("snapshot_dir")) c.snapshot_dir = path_of(j["snapshot_dir"]);
    if (j.contains("graph_path")) c.graph_path = path_of(j["graph_path"]);
    if (j.contains("matrix_path")) c.matrix_path = path_of(j["matrix_path"]);
    if (j.contains("locations_path")) c.locations_path = path_of(j["locations_path"]);
    if (j.contains("ui_dir")) c.ui_dir = path_of(j["ui_dir"]);
    if (j.contains("router")) {
      const auto& r = j["router"];
      check_keys(r, {"alpha", "p_ref_mm", "rain_cap", "beta", "t_snow_c"}, "router");
      c.weights.alpha = r.value("alpha", c.weights.alpha);
      c.weights.p_ref_mm = r.value("p_ref_mm", c.weights.p_ref_mm);
      c.weights.rain_cap = r.value("rain_cap", c.weights.rain_cap);
      c.weights.beta = r.value("beta", c.weights.beta);
      c.weights.t_snow_c = r.value("t_snow_c", c.weights.t_snow_c);
    }
    if (j.contains("recommend")) {
      const auto& r = j["recommend"];
      check_keys(r, {"n", "k", "lambda"}, "recommend");
      c.recommend.n = r.value("n", c.recommend.n);
      c.recommend.k = r.value("k", c.recommend.k);
      c.recommend.lambda = r.value("lambda", c.recommend.lambda);
    }
    c.cluster_seed = j.value("cluster_seed", c.cluster_seed);
    c.render_scale = j.value("render_scale", c.render_scale);
    if (j.contains("provider")) {
      const auto& p = j["provider"];
      check_keys(p, {"mode", "fixture_dir", "interval_s", "region"}, "provider");
      const std::string mode = p.value("mode", "off");
      if (mode == "off") {
        c.provider.mode = ProviderConfig::Mode::off;
      } else if (mode == "replay") {
        c.provider.mode = ProviderConfig::Mode::replay;
      } else {
        throw Error(Errc::bad_config, "provider mode must be off or replay");
      }
      if (p.contains("fixture_dir")) c.provider.fixture_dir = path_of(p["fixture_dir"]);
      c.provider.interval_s = p.value("interval_s", c.provider.interval_s);
      if (p.contains("region")) {
        const auto& r = p["region"];
        check_keys(r, {"lat_min", "lat_max", "lon_min", "lon_max"}, "region");
        auto& reg = c.provider.region;
        reg.lat_min = r.value("lat_min", reg.lat_min);
        reg.lat_max = r.value("lat_max", reg.lat_max);
        reg.lon_min = r.value("lon_min", reg.lon_min);
        reg.lon_max = r.value("lon_max", reg.lon_max);
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::bad_config, std::string("bad config: ") + e.what());
  }
  return c;
}

void apply_env_overrides(ApiConfig& c) {
  if (const char* listen = std::getenv("WXREC_LISTEN"); listen != nullptr && *listen != '\0') {
    const std::string s = listen;
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) {
      c.listen_address = s;
    } else {
      if (colon > 0) c.listen_address = s.substr(0, colon);
      int port = -1;
      const std::string p = s.substr(colon + 1);
      auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), port);
      if (ec != std::errc{} || ptr != p.data() + p.size()) {
        throw Error(Errc::bad_config, "WXREC_LISTEN must look like host:port");
      }
      c.port = port;
    }
  }
  if (const char* dir = std::getenv("WXREC_DATA_DIR"); dir != nullptr && *dir != '\0') {
    c.snapshot_dir = dir;
  }
}

ApiConfig load_config(const fs::path& path) {
  ApiConfig c = parse_config(read_text(path), path.parent_path());
  apply_env_overrides(c);
  return c;
}

// --- serializers -----------------------------------------------------------

std::string report_json(const forecast::ForecastReport& r, bool pretty) {
  json basis{{"count", r.basis.count},
             {"first", r.basis.first ? json(to_iso(*r.basis.first)) : json(nullptr)},
             {"last", r.basis.last ? json(to_iso(*r.basis.last)) : json(nullptr)}};
  json j{{"point", point_json(r.point)},
         {"cell",
          {{"lat_idx", r.cell.lat_idx}, {"lon_idx", r.cell.lon_idx}, {"lat", r.cell_lat},
           {"lon", r.cell_lon}}},
         {"variable", r.variable},
         {"kind", nc::to_string(r.kind)},
         {"units", r.units},
         {"date", to_iso(r.target)},
         {"value", finite_or_null(r.value)},
         {"method", forecast::to_string(r.method)},
         {"basis", std::move(basis)}};
  if (r.trend) {
    j["trend"] = {{"slope_per_year", r.trend->slope},
                  {"intercept", r.trend->intercept},
                  {"years", r.trend->n},
                  {"month", r.trend->month}};
  }
  return dump(j, pretty);
}

std::string route_json(const router::RouteResult& r, bool pretty) {
  json coords = json::array();
  for (const auto& p : r.coordinates) coords.push_back(point_json(p));
  json legs = json::array();
  for (const auto& l : r.legs) {
    legs.push_back({{"edge", l.edge},
                    {"from", l.from},
                    {"to", l.to},
                    {"length_km", l.length_km},
                    {"precip_mm", l.weather.precip_mm},
                    {"precip_known", l.weather.precip_known},
                    {"temp_c", l.weather.temp_known ? json(l.weather.temp_c) : json(nullptr)},
                    {"cost", l.cost}});
  }
  json j{{"depart", to_iso(r.depart)},
         {"nodes", r.nodes},
         {"coordinates", std::move(coords)},
         {"legs", std::move(legs)},
         {"total_cost", r.total_cost},
         {"total_length", r.total_length}};
  return dump(j, pretty);
}

std::string recommendations_json(const recsys::InteractionMatrix& m, std::string_view user,
                                 const recsys::RecommendOptions& o, Date date,
                                 const std::vector<recsys::Recommendation>& recs, bool pretty) {
  json list = json::array();
  for (const auto& r : recs) {
    const auto& loc = m.location(r.location);
    list.push_back({{"rank", r.rank},
                    {"location", r.location},
                    {"lat", loc.point.lat()},
                    {"lon", loc.point.lon()},
                    {"cf_score", r.cf_score},
                    {"raw_cf_score", r.raw_cf_score},
                    {"comfort_score", r.comfort_score},
                    {"comfort_known", r.comfort_known},
                    {"blended_score", r.blended_score}});
  }
  json j{{"user", user},
         {"date", to_iso(date)},
         {"lambda", o.lambda},
         {"n", o.n},
         {"recommendations", std::move(list)}};
  return dump(j, pretty);
}

std::string grid_json(const forecast::GridField& f, bool pretty) {
  json values = json::array();
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    values.push_back(f.mask[i] ? json(nullptr) : finite_or_null(f.values[i]));
  }
  json lo = nullptr, hi = nullptr;
  try {
    const auto [a, b] = render::auto_range({f.lats, f.lons, f.values, f.mask});
    lo = a;
    hi = b;
  } catch (const Error&) {
    // every cell masked: no range to report
  }
  json j{{"variable", f.variable}, {"kind", nc::to_string(f.kind)}, {"date", to_iso(f.date)},
         {"lats", f.lats},         {"lons", f.lons},                  {"values", std::move(values)},
         {"mask", f.mask},         {"lo", lo},                        {"hi", hi}};
  return dump(j, pretty);
}

std::string error_json(std::string_view code, std::string_view message) {
  return json{{"error", code}, {"message", message}}.dump();
}

const render::Palette& palette_for(store::VariableKind kind) {
  return kind == store::VariableKind::rainfall ? render::rain_palette() : render::thermal_palette();
}

GridRender render_forecast_grid(const store::StoreSnapshot& snapshot, std::string_view variable,
                                Date date, std::size_t scale,
                                std::optional<std::pair<double, double>> range) {
  GridRender g;
  g.field = forecast::forecast_field(snapshot, variable, date);
  const render::FieldView view{g.field.lats, g.field.lons, g.field.values, g.field.mask};
  const auto [lo, hi] = range ? *range : render::auto_range(view);
  const auto& palette = palette_for(g.field.kind);
  g.image = render::render_field(view, lo, hi, palette, scale);
  g.sidecar = {g.field.variable, to_iso(date), lo, hi, palette.name, g.field.lats.size(),
               g.field.lons.size()};
  return g;
}

ClusterResult fit_clusters(const store::StoreSnapshot& snapshot, std::size_t k, std::uint64_t seed) {
  if (snapshot.is_empty()) throw Error(Errc::empty_store, "store is empty");
  ClusterResult r;
  r.features = cluster::build_features(snapshot);
  r.model = cluster::kmeans_fit(r.features, k, seed);
  r.json = cluster::to_json(r.model, r.features);
  return r;
}

render::RasterImage render_clusters(const store::StoreSnapshot& snapshot, const ClusterResult& c,
                                    std::size_t scale) {
  std::vector<int> categories(snapshot.cell_count(), -1);
  for (std::size_t r = 0; r < c.features.rows(); ++r) {
    categories[snapshot.cell_index(c.features.cells[r])] = c.model.assignments[r];
  }
  return render::render_categories(snapshot.lats(), snapshot.lons().size(), categories, scale);
}

// --- service -----------------------------------------------------------------

Resources load_resources(const ApiConfig& config) {
  config.validate();
  Resources r;
  if (!config.snapshot_dir.empty()) r.snapshot = store::load_latest(config.snapshot_dir);
  if (!config.graph_path.empty()) r.graph = router::load_geojson(config.graph_path.string());
  if (!config.locations_path.empty()) {
    for (auto& loc : recsys::parse_locations(read_text(config.locations_path))) {
      r.matrix.add_location(std::move(loc));
    }
  }
  if (!config.matrix_path.empty() && fs::exists(config.matrix_path)) {
    recsys::load_jsonl(r.matrix, read_text(config.matrix_path));
  }
  return r;
}

Service::Service(ApiConfig config, Resources resources)
    : config_(std::move(config)),
      store_(std::move(resources.snapshot)),
      graph_(std::move(resources.graph)),
      matrix_(std::make_shared<const recsys::InteractionMatrix>(std::move(resources.matrix))) {
  if (config_.provider.mode == ProviderConfig::Mode::replay) {
    provider_ = std::make_unique<provider::ReplayProvider>(config_.provider.fixture_dir);
  }
}

Service::~Service() { stop_provider(); }

std::shared_ptr<const recsys::InteractionMatrix> Service::matrix() const {
  std::lock_guard lock(matrix_mutex_);
  return matrix_;
}

void Service::set_log_sink(LogSink sink) {
  std::lock_guard lock(log_mutex_);
  log_sink_ = std::move(sink);
}

void Service::log(std::string_view line) {
  std::lock_guard lock(log_mutex_);
  if (log_sink_) {
    log_sink_(line);
  } else {
    std::cerr << "wxrec: " << line << "\n";
  }
}

ApiResponse Service::handle(const ApiRequest& req) {
  const store::SnapshotPtr snap = store_.current();
  ApiResponse resp;
  try {
    const bool get = req.method == "GET";
    auto only = [&](bool ok) {
      if (!ok) throw HttpError{405, "method_not_allowed", req.method + " not allowed on " + req.path};
    };
    if (req.path == "/healthz") {
      only(get);
      resp.body = json{{"status", "ok"}, {"snapshot_version", snap->version()}}.dump();
    } else if (req.path == "/v1/forecast") {
      only(get);
      resp = forecast(req, snap);
    } else if (req.path == "/v1/route") {
      only(get);
      resp = route(req, snap);
    } else if (req.path == "/v1/recommendations") {
      only(get);
      resp = recommendations(req, snap);
    } else if (req.path == "/v1/interactions") {
      only(req.method == "POST");
      resp = interactions(req);
    } else if (req.path == "/v1/grid") {
      only(get);
      resp = grid(req, snap);
    } else if (req.path == "/v1/clusters") {
      only(get);
      resp = clusters(req, snap);
    } else {
      throw HttpError{404, "not_found", "no such endpoint: " + req.path};
    }
  } catch (const HttpError& e) {
    resp = {e.status, "application/json", error_json(e.code, e.message), 0};
  } catch (const Error& e) {
    resp = {status_for(e.code()), "application/json", error_json(to_string(e.code()), e.what()), 0};
    if (resp.status == 500) log(std::string(req.path) + ": " + e.what());
  } catch (const std::exception& e) {
    log(std::string(req.path) + ": " + e.what());
    resp = {500, "application/json", error_json("internal", e.what()), 0};
  }
  resp.snapshot_version = snap->version();
  return resp;
}

ApiResponse Service::forecast(const ApiRequest& req, const store::SnapshotPtr& snap) {
  const GeoPoint point = point_param(req, "lat", "lon");
  const Date date = parse_date(require(req, "date"));
  const std::string& var = require(req, "var");
  require_store(snap);
  const auto report = forecast::forecast_at(*snap, point, date, snap->resolve_variable(var));
  return {200, "application/json", report_json(report), 0};
}

ApiResponse Service::route(const ApiRequest& req, const store::SnapshotPtr& snap) {
  const GeoPoint from = point_param(req, "from_lat", "from_lon");
  const GeoPoint to = point_param(req, "to_lat", "to_lon");
  const Date depart = parse_date(require(req, "depart"));
  if (!graph_ || graph_->empty()) throw HttpError{503, "graph_missing", "no road graph is loaded"};
  const auto result = router::best_path(*graph_, from, to, depart, snap.get(), config_.weights);
  return {200, "application/json", route_json(result), 0};
}

ApiResponse Service::recommendations(const ApiRequest& req, const store::SnapshotPtr& snap) {
  const std::string& user = require(req, "user");
  recsys::RecommendOptions opt = config_.recommend;
  if (auto n = optional_param(req, "n")) {
    opt.n = parse_count(*n, "n");
    if (opt.n == 0) throw HttpError{400, "bad_param", "n must be at least 1"};
  }
  if (auto l = optional_param(req, "lambda")) {
    opt.lambda = parse_double(*l, "lambda", "bad_param");
    if (opt.lambda < 0.0 || opt.lambda > 1.0) {
      throw HttpError{400, "bad_param", "lambda must lie in [0, 1]"};
    }
  }
  const Date date = optional_param(req, "date") ? parse_date(*optional_param(req, "date")) : today_utc();
  const auto m = matrix();
  const auto recs = recsys::recommend(*m, user, opt, snap.get(), date);
  return {200, "application/json", recommendations_json(*m, user, opt, date, recs), 0};
}

ApiResponse Service::interactions(const ApiRequest& req) {
  std::string user, location;
  double weight = 1.0;
  try {
    const json body = json::parse(req.body);
    user = body.at("user").get<std::string>();
    location = body.at("location").get<std::string>();
    if (body.contains("weight")) weight = body["weight"].get<double>();
  } catch (const json::exception& e) {
    throw HttpError{400, "bad_body", std::string("expected {user, location, weight}: ") + e.what()};
  }
  if (user.empty()) throw HttpError{400, "bad_body", "user must not be empty"};
  if (!std::isfinite(weight)) throw HttpError{400, "non_positive_weight", "weight must be finite"};

  std::lock_guard writer(matrix_writer_);
  auto next = std::make_shared<recsys::InteractionMatrix>(*matrix());
  next->record_interaction(user, location, weight, recsys::utc_timestamp());
  if (!config_.matrix_path.empty()) write_atomically(config_.matrix_path, recsys::to_jsonl(*next));
  {
    std::lock_guard lock(matrix_mutex_);
    matrix_ = std::move(next);
  }
  return {204, "application/json", "", 0};
}

ApiResponse Service::grid(const ApiRequest& req, const store::SnapshotPtr& snap) {
  const std::string& var = require(req, "var");
  const Date date = parse_date(require(req, "date"));
  const std::string format = format_param(req);
  require_store(snap);
  if (format == "json") {
    return {200, "application/json", grid_json(forecast::forecast_field(*snap, var, date)), 0};
  }
  const auto g = render_forecast_grid(*snap, var, date, config_.render_scale);
  return {200, "image/x-portable-pixmap", render::encode_ppm(g.image), 0};
}

ApiResponse Service::clusters(const ApiRequest& req, const store::SnapshotPtr& snap) {
  std::size_t k = 5;
  if (auto v = optional_param(req, "k")) k = parse_count(*v, "k");
  if (k == 0) throw HttpError{400, "bad_param", "k must be at least 1"};
  std::uint64_t seed = config_.cluster_seed;
  if (auto v = optional_param(req, "seed")) seed = parse_count(*v, "seed");
  const std::string format = format_param(req);
  require_store(snap);

  const ClusterKey key{snap->version(), k, seed};
  std::shared_ptr<const ClusterResult> result;
  {
    std::lock_guard lock(cluster_mutex_);
    if (auto it = cluster_cache_.find(key); it != cluster_cache_.end()) result = it->second;
  }
  if (!result) {
    // Fitting is deterministic, so two racing requests produce the same model.
    result = std::make_shared<const ClusterResult>(fit_clusters(*snap, k, seed));
    std::lock_guard lock(cluster_mutex_);
    // Older snapshot versions will not be asked for again.
    std::erase_if(cluster_cache_, [&](const auto& kv) { return std::get<0>(kv.first) < snap->version(); });
    cluster_cache_.emplace(key, result);
  }
  if (format == "json") return {200, "application/json", result->json, 0};
  return {200, "image/x-portable-pixmap",
          render::encode_ppm(render_clusters(*snap, *result, config_.render_scale)), 0};
}

std::optional<std::uint64_t> Service::poll_once() {
  std::lock_guard lock(poll_mutex_);
  if (!provider_) return std::nullopt;
  const auto published = provider::poll_provider(*provider_, store_, config_.provider.region);
  if (!published) return std::nullopt;
  if (!config_.snapshot_dir.empty()) store::save_snapshot(**published, config_.snapshot_dir);
  log("published snapshot v" + std::to_string((*published)->version()));
  return (*published)->version();
}

void Service::start_provider() {
  if (!provider_ || poller_.joinable()) return;
  const auto interval = std::chrono::duration<double>(config_.provider.interval_s);
  poller_ = std::jthread([this, interval](std::stop_token stop) {
    while (!stop.stop_requested()) {
      try {
        poll_once();
      } catch (const std::exception& e) {
        log(std::string("provider poll failed: ") + e.what());
      }
      std::unique_lock lock(poll_mutex_);
      poll_cv_.wait_for(lock, stop, std::chrono::duration_cast<std::chrono::milliseconds>(interval),
                        [] { return false; });
    }
  });
}

void Service::stop_provider() {
  if (poller_.joinable()) {
    poller_.request_stop();
    poller_.join();
  }
}

}  // namespace wxrec::service
