#include "wxrec_cli/cli.hpp"

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "wxrec/error.hpp"
#include "wxrec/ncgrid.hpp"
#include "wxrec/service.hpp"
#include "wxrec/store.hpp"

namespace wxrec::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string default_store() {
  const char* env = std::getenv("WXREC_DATA_DIR");
  return env != nullptr && *env != '\0' ? env : "data";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::snapshot_io, "cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::snapshot_io, "cannot write " + p.string());
}

// "52.1,4.3" -> point
GeoPoint parse_pair(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw Error(Errc::bad_coords, "expected LAT,LON but got '" + text + "'");
  try {
    std::size_t a = 0, b = 0;
    const double lat = std::stod(text.substr(0, comma), &a);
    const double lon = std::stod(text.substr(comma + 1), &b);
    if (a != comma || b != text.size() - comma - 1) throw std::invalid_argument("trailing");
    return GeoPoint(lat, lon);
  } catch (const std::logic_error&) {
    throw Error(Errc::bad_coords, "expected LAT,LON but got '" + text + "'");
  }
}

std::string reformat(const std::string& json_line, bool pretty) {
  return pretty ? json::parse(json_line).dump(2) : json_line;
}

bool looks_like_netcdf(const std::string& bytes) { return bytes.rfind("CDF", 0) == 0 || bytes.rfind("\x89HDF", 0) == 0; }

std::atomic<service::HttpServer*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

struct Options {
  bool pretty = false;
  std::string store_dir = default_store();

  std::string input, output;
  std::vector<std::string> vars;
  std::string source;

  std::size_t k = 5;
  std::uint64_t seed = 42;
  std::string ppm;

  double lat = 0, lon = 0;
  std::string date, var;

  std::string from, to, depart, graph;
  router::WeatherWeights weights;

  std::size_t scale = 4;
  std::optional<double> lo, hi;

  std::string config, listen;
};

int cmd_convert(const Options& o, std::ostream& out) {
  const auto ds = nc::read_classic_file(o.input);
  const std::string csv = nc::convert_to_csv(ds, o.vars);
  if (o.output.empty() || o.output == "-") {
    out << csv;
    return ok;
  }
  write_file(o.output, csv);
  json j{{"input", o.input}, {"output", o.output}, {"rows", ds.value_count()}};
  json names = json::array();
  if (o.vars.empty()) {
    for (const auto& [name, _] : ds.fields) names.push_back(name);
  } else {
    names = o.vars;
  }
  j["variables"] = std::move(names);
  out << (o.pretty ? j.dump(2) : j.dump()) << "\n";
  return ok;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto base = store::load_latest(o.store_dir);
  const std::string bytes = read_file(o.input);
  const std::string source = o.source.empty() ? fs::path(o.input).filename().string() : o.source;
  store::SnapshotPtr next;
  if (looks_like_netcdf(bytes)) {
    next = store::ingest(*base, nc::parse_classic(std::as_bytes(std::span(bytes.data(), bytes.size()))), source);
  } else {
    next = store::ingest_csv(*base, bytes, source);
  }
  const auto dir = store::save_snapshot(*next, o.store_dir);
  json vars = json::array();
  for (const auto& v : next->variables()) vars.push_back(v.name);
  json j{{"version", next->version()},
         {"snapshot", dir.string()},
         {"source", source},
         {"grid", {next->lats().size(), next->lons().size()}},
         {"variables", std::move(vars)}};
  out << (o.pretty ? j.dump(2) : j.dump()) << "\n";
  return ok;
}

int cmd_cluster(const Options& o, std::ostream& out) {
  const auto snap = store::load_latest(o.store_dir);
  const auto result = service::fit_clusters(*snap, o.k, o.seed);
  if (!o.output.empty()) write_file(o.output, result.json + "\n");
  if (!o.ppm.empty()) write_file(o.ppm, render::encode_ppm(service::render_clusters(*snap, result, o.scale)));
  out << reformat(result.json, o.pretty) << "\n";
  return ok;
}

int cmd_forecast(const Options& o, std::ostream& out) {
  const GeoPoint point(o.lat, o.lon);
  const Date date = parse_date(o.date);
  const auto snap = store::load_latest(o.store_dir);
  if (snap->is_empty()) throw Error(Errc::empty_store, "no snapshot in " + o.store_dir);
  const auto report = forecast::forecast_at(*snap, point, date, snap->resolve_variable(o.var));
  out << service::report_json(report, o.pretty) << "\n";
  return ok;
}

int cmd_route(const Options& o, std::ostream& out) {
  const GeoPoint from = parse_pair(o.from);
  const GeoPoint to = parse_pair(o.to);
  const Date depart = parse_date(o.depart);
  const auto graph = router::load_geojson(o.graph);
  const auto snap = store::load_latest(o.store_dir);
  const auto result = router::best_path(graph, from, to, depart, snap.get(), o.weights);
  out << service::route_json(result, o.pretty) << "\n";
  return ok;
}

int cmd_render(const Options& o, std::ostream& out) {
  const Date date = parse_date(o.date);
  const auto snap = store::load_latest(o.store_dir);
  if (snap->is_empty()) throw Error(Errc::empty_store, "no snapshot in " + o.store_dir);
  std::optional<std::pair<double, double>> range;
  if (o.lo || o.hi) {
    if (!o.lo || !o.hi) throw Error(Errc::invalid_argument, "--lo and --hi go together");
    range = std::pair{*o.lo, *o.hi};
  }
  const auto g = service::render_forecast_grid(*snap, o.var, date, o.scale, range);
  write_file(o.output, render::encode_ppm(g.image));
  const std::string sidecar = render::sidecar_json(g.sidecar);
  write_file(o.output + ".json", sidecar + "\n");
  out << reformat(sidecar, o.pretty) << "\n";
  return ok;
}

int cmd_serve(const Options& o, std::ostream& err) {
  auto config = service::load_config(o.config);
  if (!o.listen.empty()) {
    ::setenv("WXREC_LISTEN", o.listen.c_str(), 1);
    service::apply_env_overrides(config);
  }
  service::Service svc(config);
  service::HttpServer server(svc);
  const int port = server.bind(config.listen_address, config.port);
  err << "wxrec: listening on " << config.listen_address << ":" << port << " (snapshot v"
      << svc.store().current()->version() << ")" << std::endl;
  svc.start_provider();
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.serve();
  g_server = nullptr;
  svc.stop_provider();
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"wxrec: gridded weather forecasting, clustering, recommendations and routing"};
  app.name("wxrec");
  app.require_subcommand(1);
  Options o;
  app.add_flag("--pretty", o.pretty, "Indent JSON output");

  auto* convert = app.add_subcommand("convert", "NetCDF classic file to CSV");
  convert->add_option("input", o.input, "Input .nc file")->required();
  convert->add_option("output", o.output, "Output CSV (stdout when omitted)");
  convert->add_option("--var", o.vars, "Only these variables");

  auto add_store = [&](CLI::App* sub) {
    sub->add_option("--store", o.store_dir, "Snapshot directory")->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Publish a new snapshot from a .nc or CSV file");
  ingest->add_option("input", o.input, "Input file")->required();
  ingest->add_option("--source", o.source, "Provenance tag (default: file name)");
  add_store(ingest);

  auto* cluster = app.add_subcommand("cluster", "k-means over per-cell climate features");
  cluster->add_option("--k", o.k, "Number of clusters")->capture_default_str()->check(CLI::PositiveNumber);
  cluster->add_option("--seed", o.seed, "Seed")->capture_default_str();
  cluster->add_option("--out", o.output, "Also write the model JSON here");
  cluster->add_option("--ppm", o.ppm, "Write a cluster map");
  cluster->add_option("--scale", o.scale, "Pixels per cell")->capture_default_str()->check(CLI::Range(1, 64));
  add_store(cluster);

  auto* fc = app.add_subcommand("forecast", "Forecast one variable at a point");
  fc->add_option("--lat", o.lat, "Latitude")->required();
  fc->add_option("--lon", o.lon, "Longitude")->required();
  fc->add_option("--date", o.date, "Target date (YYYY-MM-DD, YYYY-MM or M/YYYY)")->required();
  fc->add_option("--var", o.var, "Variable name or kind")->required();
  add_store(fc);

  auto* route = app.add_subcommand("route", "Weather-aware route between two points");
  route->add_option("--from", o.from, "Origin LAT,LON")->required();
  route->add_option("--to", o.to, "Destination LAT,LON")->required();
  route->add_option("--depart", o.depart, "Departure date")->required();
  route->add_option("--graph", o.graph, "Road network (GeoJSON)")->required();
  route->add_option("--alpha", o.weights.alpha, "Rain penalty")->capture_default_str();
  route->add_option("--p-ref", o.weights.p_ref_mm, "Reference precipitation, mm")->capture_default_str();
  route->add_option("--rain-cap", o.weights.rain_cap, "Cap on precip / p-ref")->capture_default_str();
  route->add_option("--beta", o.weights.beta, "Snow penalty")->capture_default_str();
  route->add_option("--t-snow", o.weights.t_snow_c, "Snow temperature, degC")->capture_default_str();
  add_store(route);

  auto* rnd = app.add_subcommand("render", "Forecast grid to PPM plus a JSON sidecar");
  rnd->add_option("--var", o.var, "Variable name or kind")->required();
  rnd->add_option("--date", o.date, "Target date")->required();
  rnd->add_option("--out", o.output, "Output .ppm")->required();
  rnd->add_option("--scale", o.scale, "Pixels per cell")->capture_default_str()->check(CLI::Range(1, 64));
  rnd->add_option("--lo", o.lo, "Range low end");
  rnd->add_option("--hi", o.hi, "Range high end");
  add_store(rnd);

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--config", o.config, "Config JSON")->required();
  serve->add_option("--listen", o.listen, "host:port, overrides the config");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "wxrec: " << e.what() << "\n";
    const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return usage;
  }

  try {
    if (convert->parsed()) return cmd_convert(o, out);
    if (ingest->parsed()) return cmd_ingest(o, out);
    if (cluster->parsed()) return cmd_cluster(o, out);
    if (fc->parsed()) return cmd_forecast(o, out);
    if (route->parsed()) return cmd_route(o, out);
    if (rnd->parsed()) return cmd_render(o, out);
    if (serve->parsed()) return cmd_serve(o, err);
  } catch (const Error& e) {
    err << service::error_json(to_string(e.code()), e.what()) << "\n";
    return data_error;
  } catch (const std::exception& e) {
    err << service::error_json("internal", e.what()) << "\n";
    return internal_error;
  }
  err << app.help();
  return usage;
}

}  // namespace wxrec::cli
