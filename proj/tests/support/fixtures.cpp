#include "fixtures.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace fx {

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "wxrec-test-XXXXXX").string();
  if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << data;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

wxrec::nc::GridDataset parse(const std::vector<std::uint8_t>& bytes) {
  return wxrec::nc::parse_classic(std::as_bytes(std::span(bytes.data(), bytes.size())));
}

oracle::File small_grid_file() {
  using namespace oracle;
  File f;
  f.version = 1;
  f.numrecs = 2;
  f.dims = {{"time", 0}, {"lat", 2}, {"lon", 3}};
  f.gatts = {{"title", kChar, "small grid", {}}};
  Var time{"time", {0}, {{"units", kChar, "days since 2000-01-01", {}}}, kDouble, {0, 1}, {}};
  Var lat{"lat", {1}, {{"units", kChar, "degrees_north", {}}}, kFloat, {10, 20}, {}};
  Var lon{"lon", {2}, {{"units", kChar, "degrees_east", {}}}, kFloat, {0, 5, 10}, {}};
  Var temp{"temp", {0, 1, 2}, {{"units", kChar, "degC", {}}}, kFloat, {}, {}};
  for (int i = 0; i < 12; ++i) temp.data.push_back(i + 0.5);
  f.vars = {time, lat, lon, temp};
  return f;
}

namespace {

double random_value(std::mt19937_64& rng, int type, double fill) {
  for (;;) {
    double v = 0;
    switch (type) {
      case oracle::kByte: v = std::uniform_int_distribution<int>(-120, 120)(rng); break;
      case oracle::kShort: v = std::uniform_int_distribution<int>(-32000, 32000)(rng); break;
      case oracle::kInt: v = std::uniform_int_distribution<std::int32_t>(-2000000000, 2000000000)(rng); break;
      case oracle::kFloat: v = static_cast<float>(std::normal_distribution<double>(0, 50)(rng)); break;
      default: v = std::normal_distribution<double>(0, 1e3)(rng); break;
    }
    if (v != fill) return v;
  }
}

std::vector<double> random_axis(std::mt19937_64& rng, std::size_t n, double lo, double hi, int type) {
  std::uniform_real_distribution<double> step(0.25, 3.0);
  std::vector<double> a;
  double x = std::uniform_real_distribution<double>(lo, hi - 15)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(type == oracle::kFloat ? static_cast<double>(static_cast<float>(x)) : x);
    x += step(rng);
  }
  if (a.back() > hi) throw std::logic_error("axis overflow");
  if (rng() % 2 == 0) std::reverse(a.begin(), a.end());
  return a;
}

}  // namespace

RandomCase random_case(std::mt19937_64& rng) {
  using namespace oracle;
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  RandomCase rc;
  File& f = rc.file;
  f.version = 1 + pick(2);
  const bool record = pick(4) != 0;
  rc.times = 1 + static_cast<std::size_t>(pick(4));
  rc.lats = 1 + static_cast<std::size_t>(pick(5));
  rc.lons = 1 + static_cast<std::size_t>(pick(6));
  f.numrecs = record ? static_cast<std::uint32_t>(rc.times) : 0;

  f.dims.push_back({"time", record ? 0u : static_cast<std::uint32_t>(rc.times)});
  f.dims.push_back({pick(2) ? "lat" : "latitude", static_cast<std::uint32_t>(rc.lats)});
  f.dims.push_back({pick(2) ? "lon" : "LONGITUDE", static_cast<std::uint32_t>(rc.lons)});
  f.dims.push_back({"level", 1});
  f.dims.push_back({"nchar", 7});
  f.gatts.push_back({"title", kChar, "random oracle file", {}});
  f.gatts.push_back({"version", kInt, {}, {3}});

  const int lat_type = pick(2) ? kFloat : kDouble;
  const int lon_type = pick(2) ? kFloat : kDouble;
  f.vars.push_back({f.dims[1].name, {1}, {{"units", kChar, "degrees_north", {}}}, lat_type,
                    random_axis(rng, rc.lats, -85, 85, lat_type), {}});
  f.vars.push_back({f.dims[2].name, {2}, {{"units", kChar, "degrees_east", {}}}, lon_type,
                    random_axis(rng, rc.lons, -175, 175, lon_type), {}});
  if (pick(3) != 0) {
    const int tt = std::vector<int>{kInt, kFloat, kDouble, kShort}[static_cast<std::size_t>(pick(4))];
    Var t{"time", {0}, {{"units", kChar, "days since 1990-01-01", {}}}, tt, {}, {}};
    double x = pick(100);
    for (std::size_t i = 0; i < rc.times; ++i) {
      t.data.push_back(x);
      x += 1 + pick(30);
    }
    f.vars.push_back(t);
  }
  f.vars.push_back({"station", {4}, {{"long_name", kChar, "id", {}}}, kChar, {}, "ABCDEFG"});

  const int nfields = 1 + pick(3);
  const std::size_t cells = rc.times * rc.lats * rc.lons;
  for (int v = 0; v < nfields; ++v) {
    const int type = std::vector<int>{kByte, kShort, kInt, kFloat, kDouble}[static_cast<std::size_t>(pick(5))];
    Var var;
    var.name = "field" + std::to_string(v);
    var.type = type;
    var.dims = pick(2) ? std::vector<int>{0, 3, 1, 2} : std::vector<int>{0, 1, 2};
    // Attributes of every numeric type exercise the attribute decoder.
    var.atts = {{"long_name", kChar, "field number " + std::to_string(v), {}},
                {"b_att", kByte, {}, {-3, 4, 5}},
                {"s_att", kShort, {}, {-300}},
                {"i_att", kInt, {}, {70000, -1}},
                {"f_att", kFloat, {}, {0.25}},
                {"d_att", kDouble, {}, {1e-300, 2.5}}};
    double fill = default_fill(type);
    if (pick(2)) {
      fill = type == kByte ? -100 : -9999;
      Att a{"_FillValue", type, {}, {fill}};
      var.atts.push_back(a);
    }
    RandomCase::Expect e{var.name, type, {}, {}};
    for (std::size_t k = 0; k < cells; ++k) {
      const bool masked = pick(7) == 0;
      const double x = masked ? fill : random_value(rng, type, fill);
      var.data.push_back(x);
      e.values.push_back(type == kFloat ? static_cast<double>(static_cast<float>(x)) : x);
      e.mask.push_back(masked ? 1 : 0);
    }
    f.vars.push_back(var);
    rc.fields.push_back(std::move(e));
  }
  return rc;
}

wxrec::store::SnapshotPtr snapshot_from_csv(const std::string& csv) {
  return wxrec::store::ingest_csv(*wxrec::store::StoreSnapshot::empty(), csv, "fixture");
}

std::string linear_trend_csv() {
  std::ostringstream s;
  s << "time,lat,lon,temp\n";
  for (int y = 2000; y <= 2010; ++y) {
    s << y << "-07-15,50,10," << 10 + 0.02 * (y - 2000) << "\n";
  }
  return s.str();
}

std::string service_grid_csv() {
  const double lats[] = {50, 51, 52};
  const double lons[] = {10, 11, 12, 13};
  std::ostringstream s;
  s.precision(17);
  s << "time,lat,lon,temp,precip\n";
  for (int y = 2019; y <= 2020; ++y) {
    for (int m = 1; m <= 12; ++m) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 4; ++j) {
          // Three climate regimes across the grid so clustering has structure.
          const double base = 5.0 + 4.0 * i + 0.5 * j;
          const double season = (6 + i) * std::cos((m - 7) * 3.14159265358979 / 6.0);
          const double temp = std::round((base + season + 0.1 * (y - 2019)) * 100) / 100;
          double precip = (j < 2 ? 40.0 : 80.0) + 5.0 * i + (m % 3);
          if (y == 2020 && m == 12) precip = (i == 1 && (j == 1 || j == 2)) ? 20.0 : 0.0;
          char date[16];
          std::snprintf(date, sizeof date, "%04d-%02d-15", y, m);
          s << date << ',' << lats[i] << ',' << lons[j] << ',' << temp << ',' << precip << '\n';
        }
      }
    }
  }
  return s.str();
}

std::string diamond_geojson() {
  auto line = [](double lat1, double lon1, double lat2, double lon2) {
    std::ostringstream s;
    s << R"({"type":"Feature","properties":{},"geometry":{"type":"LineString","coordinates":[[)"
      << lon1 << ',' << lat1 << "],[" << lon2 << ',' << lat2 << "]]}}";
    return s.str();
  };
  return std::string(R"({"type":"FeatureCollection","features":[)") + line(51, 10, 51, 11.5) + "," +
         line(51, 11.5, 51, 13) + "," + line(51, 10, 52.2, 11.5) + "," + line(52.2, 11.5, 51, 13) +
         "," + line(50, 10, 50, 10.3) + "]}";
}

ServiceFiles write_service_fixture(const fs::path& root) {
  ServiceFiles out;
  auto& c = out.config;
  c.listen_address = "127.0.0.1";
  c.port = 0;
  c.snapshot_dir = root / "snapshots";
  c.graph_path = root / "roads.geojson";
  c.locations_path = root / "locations.json";
  c.matrix_path = root / "interactions.jsonl";
  out.fixtures = root / "provider";
  fs::create_directories(out.fixtures);

  wxrec::store::save_snapshot(*snapshot_from_csv(service_grid_csv()), c.snapshot_dir);
  write_file(c.graph_path, diamond_geojson());
  write_file(c.locations_path,
             R"([{"id":"L1","lat":50,"lon":10},{"id":"L2","lat":50,"lon":13},)"
             R"({"id":"L3","lat":51,"lon":11},{"id":"L4","lat":52,"lon":12},)"
             R"({"id":"L5","lat":52,"lon":13}])");
  write_file(c.matrix_path,
             R"({"user":"alice","location":"L1","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"alice","location":"L2","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"alice","location":"L3","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"bob","location":"L1","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"bob","location":"L2","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"bob","location":"L3","weight":1,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"bob","location":"L4","weight":2,"last_updated":"2021-01-01T00:00:00Z"})" "\n"
             R"({"user":"carol","location":"L5","weight":3,"last_updated":"2021-01-01T00:00:00Z"})" "\n");
  write_file(out.fixtures / "000-corrupt.json", "{\"source\": \"broken\", \"observations\": [");
  write_file(out.fixtures / "001.json",
             R"({"source":"replay-1","observations":[)"
             R"({"lat":50,"lon":10,"variable":"temp","time":"2020-12-20","value":3.5},)"
             R"({"cell":{"lat_idx":2,"lon_idx":3},"variable":"precip","time":"2020-12-20","value":1.25}]})");
  write_file(out.fixtures / "002.json",
             R"({"source":"replay-2","observations":[)"
             R"({"lat":50.1,"lon":10.2,"variable":"temp","time":"2020-12-21","value":4.0}]})");
  c.provider.mode = wxrec::service::ProviderConfig::Mode::replay;
  c.provider.fixture_dir = out.fixtures;
  c.provider.interval_s = 3600;
  return out;
}

}  // namespace fx
