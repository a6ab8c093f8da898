// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "wxrec/cluster.hpp"
#include "wxrec/error.hpp"
#include "wxrec/forecast.hpp"
#include "wxrec/ncgrid.hpp"
#include "wxrec/recsys.hpp"
#include "wxrec/render.hpp"
#include "wxrec/router.hpp"
#include "wxrec/service.hpp"
#include "wxrec_cli/cli.hpp"

using namespace wxrec;
using nlohmann::json;

namespace {

// Collects the first few failures of a criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << failed_ << "/" << checks_ << " checks failed";
    for (const auto& f : failures_) s << "; " << f;
    return s.str();
  }
  std::size_t checks() const { return checks_; }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::span<const std::byte> bytes_of(const std::vector<std::uint8_t>& v) {
  return std::as_bytes(std::span(v.data(), v.size()));
}

// --- NetCDF ---------------------------------------------------------------

std::string netcdf_round_trip(Checker& c) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::set<int> versions, types;
  bool record = false, fill = false;
  std::size_t mutations = 0;
  for (int n = 0; n < 50; ++n) {
    const auto rc = fx::random_case(rng);
    versions.insert(rc.file.version);
    for (const auto& v : rc.file.vars) {
      types.insert(v.type);
      for (int d : v.dims) record |= rc.file.dims[static_cast<std::size_t>(d)].length == 0;
    }
    const auto w = oracle::write(rc.file);
    nc::GridDataset ds;
    try {
      ds = nc::parse_classic(bytes_of(w.bytes));
    } catch (const std::exception& e) {
      c.expect(false, std::string("parse failed: ") + e.what());
      continue;
    }
    const auto back = nc::parse_csv(nc::convert_to_csv(ds));
    for (const auto& e : rc.fields) {
      const auto& f = nc::read_variable(ds, e.name);
      const auto& g = nc::read_variable(back, e.name);
      c.expect(f.mask == e.mask && g.mask == e.mask, "mask mismatch in " + e.name);
      for (std::size_t k = 0; k < e.values.size(); ++k) {
        if (e.mask[k]) {
          fill = true;
          continue;
        }
        bool same = f.values[k] == e.values[k];
        if (e.type == oracle::kFloat) {
          same = same && std::bit_cast<std::uint32_t>(static_cast<float>(g.values[k])) ==
                             std::bit_cast<std::uint32_t>(static_cast<float>(e.values[k]));
        } else {
          same = same && g.values[k] == e.values[k];
        }
        c.expect(same, "value mismatch in " + e.name);
      }
    }

    auto typed = [&](const std::vector<std::uint8_t>& m, bool must_fail) {
      ++mutations;
      try {
        nc::parse_classic(bytes_of(m));
        c.expect(!must_fail, "mutation accepted");
      } catch (const Error&) {
      } catch (const std::exception& e) {
        c.expect(false, std::string("untyped failure: ") + e.what());
      }
    };
    for (std::size_t at : w.tag_offsets) {
      auto m = w.bytes;
      m[at + 3] = 0x0D;
      typed(m, true);
    }
    for (std::size_t at : w.padding_offsets) {
      auto m = w.bytes;
      m[at] = 0x01;
      typed(m, true);
    }
    for (std::size_t cut = 0; cut < w.bytes.size(); cut += 1 + cut / 6) {
      auto m = w.bytes;
      m.resize(cut);
      typed(m, true);
    }
    for (int k = 0; k < 20; ++k) {
      auto m = w.bytes;
      m[rng() % m.size()] = static_cast<std::uint8_t>(rng());
      typed(m, false);
    }
  }
  c.expect(versions == std::set<int>{1, 2}, "both CDF-1 and CDF-2 covered");
  c.expect(types.size() == 6, "all six type codes covered");
  c.expect(record, "record variables covered");
  c.expect(fill, "fill values covered");
  const double s = seconds_since(t0);
  c.expect(s < 10.0, "runtime under 10 s");
  std::ostringstream o;
  o << "50 files, " << mutations << " mutations, " << s << " s";
  return o.str();
}

// --- forecasting -------------------------------------------------------------

std::string persistence_identity(Checker& c) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g(10, 15);
  for (int n = 0; n < 1000; ++n) {
    store::CellSeries s;
    s.kind = n % 2 ? store::VariableKind::temperature : store::VariableKind::rainfall;
    Date d{static_cast<std::int64_t>(rng() % 20000)};
    const int len = 1 + static_cast<int>(rng() % 60);
    for (int k = 0; k < len; ++k) {
      s.times.push_back(d);
      s.values.push_back(g(rng));
      d = d + static_cast<std::int64_t>(1 + rng() % 5);
    }
    const int horizon = 1 + static_cast<int>(rng() % 10);
    const auto out = forecast::persistence_forecast(s, horizon);
    c.expect(out.size() == static_cast<std::size_t>(horizon), "horizon length");
    for (const auto& dv : out) c.expect(dv.value == s.values.back(), "value equals last observation");

    // And through the store's dispatch, the day after the last observation.
    if (n % 10 == 0) {
      std::string csv = "time,lat,lon,temp\n";
      for (std::size_t k = 0; k < s.times.size(); ++k) {
        std::ostringstream row;
        row.precision(17);
        row << to_iso(s.times[k]) << ",0,0," << s.values[k] << "\n";
        csv += row.str();
      }
      const auto snap = fx::snapshot_from_csv(csv);
      const auto r = forecast::forecast_at(*snap, GeoPoint(0, 0), s.times.back() + 1, "temp");
      c.expect(r.method == forecast::Method::persistence, "dispatch picks persistence");
      c.expect(r.value == static_cast<double>(static_cast<float>(s.values.back())),
               "stored last observation returned");
    }
  }
  return "1000 series";
}

std::string trend_fit(Checker& c) {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> mag(100, 1000), slope(0.01, 0.5);
  auto rel = [](double got, double want) { return std::abs(got - want) / std::abs(want); };
  for (int n = 0; n < 500; ++n) {
    const double a = (rng() % 2 ? 1 : -1) * mag(rng);
    const double b = (rng() % 2 ? 1 : -1) * slope(rng);
    store::CellSeries s;
    s.kind = store::VariableKind::temperature;
    const int first = 1900 + static_cast<int>(rng() % 100);
    const int years = 2 + static_cast<int>(rng() % 60);
    for (int y = first; y < first + years; ++y) {
      s.times.push_back(Date::from_ymd(y, 7, 15));
      s.values.push_back(a + b * y);
    }
    const auto p = forecast::trend_projection(s, 7, 2100);
    c.expect(rel(p.fit.slope, b) <= 1e-9, "exact slope");
    c.expect(rel(p.fit.intercept, a) <= 1e-9, "exact intercept");
    c.expect(rel(p.value, a + b * 2100) <= 1e-9, "exact projection");
  }
  std::normal_distribution<double> noise(0, 3);
  for (int n = 0; n < 500; ++n) {
    const double a = mag(rng), b = slope(rng);
    std::vector<double> x, y;
    const int count = 3 + static_cast<int>(rng() % 80);
    for (int k = 0; k < count; ++k) {
      x.push_back(1950 + k);
      y.push_back(a + b * x.back() + noise(rng));
    }
    const auto fit = forecast::fit_line(x, y);
    const auto [oa, ob] = oracle::normal_equations(x, y);
    c.expect(rel(fit.slope, static_cast<double>(ob)) <= 1e-9, "noisy slope vs oracle");
    c.expect(rel(fit.intercept, static_cast<double>(oa)) <= 1e-9, "noisy intercept vs oracle");
  }
  // End to end: July 2100 from the linear fixture, through the library and the API.
  const auto snap = fx::snapshot_from_csv(fx::linear_trend_csv());
  const auto r = forecast::forecast_at(*snap, GeoPoint(50, 10), parse_date("7/2100"), "temp");
  c.expect(r.method == forecast::Method::trend, "2100 uses the trend regime");
  // column storage is float32
  c.expect(std::abs(r.value - 12.0) <= 1e-5 * 12.0, "2100 projection is 12.0");
  service::Resources res;
  res.snapshot = snap;
  service::Service svc(service::ApiConfig{}, std::move(res));
  const auto resp = svc.handle(
      {"GET", "/v1/forecast", {{"lat", "50"}, {"lon", "10"}, {"date", "7/2100"}, {"var", "temp"}}, ""});
  c.expect(resp.status == 200 && json::parse(resp.body)["method"] == "trend", "API serves 2100");
  return "500 exact + 500 noisy fits, 2100 end to end";
}

// --- clustering --------------------------------------------------------------

std::string kmeans(Checker& c) {
  const auto t0 = Clock::now();
  auto monotone = [&](const cluster::ClusterModel& m) {
    for (std::size_t i = 1; i < m.inertia_history.size(); ++i) {
      c.expect(m.inertia_history[i] <= m.inertia_history[i - 1], "inertia increased");
    }
  };
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0, 1);
  // Three unit-variance blobs on an equilateral triangle with side 10 sigma.
  const double cx[] = {0, 10, 5}, cy[] = {0, 0, 8.660254037844386};
  std::vector<std::vector<double>> rows;
  std::vector<int> truth;
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 100; ++i) {
      rows.push_back({cx[k] + g(rng), cy[k] + g(rng)});
      truth.push_back(k);
    }
  const auto f = cluster::FeatureMatrix::from_rows(rows, {"x", "y"});
  std::vector<double> ari;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto m = cluster::kmeans_fit(f, 3, seed);
    monotone(m);
    ari.push_back(oracle::adjusted_rand_index(truth, m.assignments));
    c.expect(cluster::to_json(m, f) == cluster::to_json(cluster::kmeans_fit(f, 3, seed), f),
             "byte-identical refit");
  }
  std::sort(ari.begin(), ari.end());
  const double median = (ari[4] + ari[5]) / 2;
  c.expect(median >= 0.9, "median ARI >= 0.9");

  for (int run = 0; run < 100; ++run) {
    const std::size_t n = 3 + rng() % 200;
    std::vector<std::vector<double>> r(n, std::vector<double>(4));
    for (auto& row : r)
      for (auto& v : row) v = g(rng) * static_cast<double>(1 + rng() % 4);
    const auto fr = cluster::FeatureMatrix::from_rows(r, {"a", "b", "c", "d"});
    monotone(cluster::kmeans_fit(fr, 1 + rng() % std::min<std::size_t>(n, 10), rng()));
  }
  // The real feature pipeline, twice.
  const auto snap = fx::snapshot_from_csv(fx::service_grid_csv());
  const auto a = service::fit_clusters(*snap, 3, 42), b = service::fit_clusters(*snap, 3, 42);
  monotone(a.model);
  c.expect(a.json == b.json, "feature pipeline deterministic");
  const double s = seconds_since(t0);
  c.expect(s < 5.0, "runtime under 5 s");
  std::ostringstream o;
  o << "median ARI " << median << ", " << s << " s";
  return o.str();
}

// --- recommendations ---------------------------------------------------------

recsys::InteractionMatrix from_dense(const std::vector<std::vector<double>>& w, std::size_t cols) {
  recsys::InteractionMatrix m;
  for (std::size_t j = 0; j < cols; ++j) m.add_location({"L" + std::to_string(j), GeoPoint(0, double(j))});
  for (std::size_t i = 0; i < w.size(); ++i) {
    m.add_user("u" + std::to_string(i));
    for (std::size_t j = 0; j < cols; ++j) {
      if (w[i][j] > 0) m.record_interaction("u" + std::to_string(i), "L" + std::to_string(j), w[i][j]);
    }
  }
  return m;
}

std::vector<std::string> ranking(const std::vector<recsys::Recommendation>& recs) {
  std::vector<std::string> out;
  for (const auto& r : recs) out.push_back(r.location);
  return out;
}

std::string collaborative_filter(Checker& c) {
  std::mt19937_64 rng(500);
  recsys::RecommendOptions opt;
  opt.lambda = 0;
  const Date day = Date::from_ymd(2020, 1, 1);
  for (int t = 0; t < 500; ++t) {
    const std::size_t users = 1 + rng() % 5, cols = 1 + rng() % 5;
    std::vector<std::vector<double>> w(users, std::vector<double>(cols));
    for (auto& r : w)
      for (auto& v : r) v = static_cast<double>(rng() % 3);
    const auto m = from_dense(w, cols);
    const std::size_t u = rng() % users;
    const std::string uid = "u" + std::to_string(u);
    const auto recs = recsys::recommend(m, uid, opt, nullptr, day);
    const int want = oracle::recsys_top1(w, u);
    c.expect(want < 0 ? recs.empty() : (!recs.empty() && recs[0].location == "L" + std::to_string(want)),
             "top-1 agrees with the exhaustive oracle");
    for (const auto& r : recs) c.expect(m.weight(uid, r.location) == 0.0, "visited location recommended");
    for (std::size_t v = 0; v < users; ++v) {
      const std::string vid = "u" + std::to_string(v);
      c.expect(recsys::user_similarity(m, uid, vid) == recsys::user_similarity(m, vid, uid),
               "cosine symmetry");
    }
    auto scaled = w;
    const double k = 0.5 + static_cast<double>(rng() % 20);
    for (auto& v : scaled[u]) v *= k;
    c.expect(ranking(recsys::recommend(from_dense(scaled, cols), uid, opt, nullptr, day)) == ranking(recs),
             "row scaling changes ranking");
  }
  return "500 matrices";
}

// --- routing -------------------------------------------------------------------

std::string router_oracle(Checker& c) {
  std::mt19937_64 rng(200);
  std::uniform_real_distribution<double> coord(0.05, 0.95), len(0.5, 20), precip(0.1, 25), temp(-8, 25);
  const Date depart = Date::from_ymd(2021, 1, 2);
  int weathered = 0;
  for (int t = 0; t < 200; ++t) {
    // Uniform weather over a 2 x 2 grid covering every node, so each edge sees
    // the same precipitation and temperature whatever its midpoint.
    const bool dry = t % 4 == 0;
    const double p = dry ? 0.0 : precip(rng), tc = temp(rng);
    std::ostringstream csv;
    csv.precision(17);
    csv << "time,lat,lon,temp,precip\n";
    for (int la = 0; la < 2; ++la)
      for (int lo = 0; lo < 2; ++lo) csv << "2021-01-01," << la << ',' << lo << ',' << tc << ',' << p << '\n';
    const auto snap = fx::snapshot_from_csv(csv.str());
    const double pf = static_cast<float>(p), tf = static_cast<float>(tc);

    router::WeatherWeights w;
    w.alpha = 0.5 + static_cast<double>(rng() % 3);
    const double factor = 1 + w.alpha * std::min(pf / w.p_ref_mm, w.rain_cap) +
                          (pf > 0 && tf <= w.t_snow_c ? w.beta : 0.0);

    router::RoadGraph g;
    std::vector<oracle::WEdge> edges, lengths;
    const std::size_t n = 2 + rng() % 7;
    for (std::size_t i = 0; i < n; ++i) g.add_node(GeoPoint(coord(rng), coord(rng)));
    auto add = [&](std::size_t a, std::size_t b) {
      const double l = len(rng);
      g.add_edge(a, b, l);
      edges.push_back({a, b, l * factor});
      lengths.push_back({a, b, l});
    };
    for (std::size_t i = 1; i < n; ++i) add(i, rng() % i);
    for (std::size_t e = rng() % (2 * n); e > 0; --e) {
      const std::size_t a = rng() % n, b = rng() % n;
      if (a != b) add(a, b);
    }
    const std::size_t s = rng() % n, d = rng() % n;
    const auto r = router::best_path(g, g.node(s), g.node(d), depart, snap.get(), w);
    const double best = oracle::min_simple_path(n, edges, s, d);
    c.expect(std::abs(r.total_cost - best) <= 1e-9 * std::max(1.0, best), "total cost vs enumeration");
    if (dry) {
      const double shortest = oracle::min_simple_path(n, lengths, s, d);
      c.expect(std::abs(r.total_cost - shortest) <= 1e-9 * std::max(1.0, shortest),
               "zero precipitation equals shortest by length");
    } else {
      ++weathered;
    }
  }
  // Diamond: the short arm is rainy, the long arm dry.
  const auto g = router::parse_geojson(fx::diamond_geojson());
  const auto snap = fx::snapshot_from_csv(fx::service_grid_csv());
  const auto r = router::best_path(g, GeoPoint(51, 10), GeoPoint(51, 13), Date::from_ymd(2020, 12, 16),
                                   snap.get(), {});
  c.expect(r.coordinates.size() == 3 && r.coordinates[1] == GeoPoint(52.2, 11.5), "diamond takes the dry arm");
  std::ostringstream o;
  o << "200 graphs (" << weathered << " with rain), diamond";
  return o.str();
}

// --- rendering -----------------------------------------------------------------

std::string render_goldens(Checker& c) {
  // Expected values worked out with exact rational arithmetic outside the library.
  const std::vector<double> lats{0, 1, 2, 3}, lons{0, 1, 2, 3};
  std::vector<double> values;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) values.push_back(i * 4 + j + 0.1);
  std::vector<std::uint8_t> mask(16, 0);
  mask[6] = 1;
  auto golden = [&] {
    return render::encode_ppm(render::render_field({lats, lons, values, mask}, 0, 16, render::thermal_palette(), 1));
  };
  const auto ppm = golden();
  c.expect(oracle::fnv1a(ppm) == 0xbe2a94a11e0d8dbbull, "4x4 golden checksum");
  c.expect(golden() == ppm, "byte-stable rerender");
  c.expect(render::encode_ppm(render::RasterImage{1, 1, {255, 255, 255}}) ==
               std::string("P6\n1 1\n255\n\xff\xff\xff"),
           "1x1 white PPM");

  const render::Palette bw{"bw", {{0.0, {0, 0, 0}}, {1.0, {255, 255, 255}}}, {0, 0, 0}};
  c.expect(render::color_of(0.5, 0, 1, bw) == render::Rgb{128, 128, 128}, "midpoint rounds half-up");
  for (const auto* p : {&render::thermal_palette(), &render::rain_palette(), &render::categorical_palette()}) {
    c.expect(render::color_of(-2, -2, 3, *p) == p->stops.front().color, p->name + " low endpoint");
    c.expect(render::color_of(3, -2, 3, *p) == p->stops.back().color, p->name + " high endpoint");
  }
  c.expect(render::color_of(2.5, 0, 10, render::thermal_palette()) == render::Rgb{152, 155, 202},
           "thermal quarter point");
  c.expect(render::color_of(5, 0, 10, render::thermal_palette()) == render::Rgb{255, 255, 255},
           "thermal midpoint");
  return "golden 0xbe2a94a11e0d8dbb";
}

// --- service -------------------------------------------------------------------

std::string error_of(const service::ApiResponse& r) {
  try {
    return json::parse(r.body).value("error", "");
  } catch (const std::exception&) {
    return "";
  }
}

std::string service_contracts(Checker& c) {
  fx::TempDir dir;
  const auto files = fx::write_service_fixture(dir.path());
  service::Service svc(files.config);
  svc.set_log_sink([](std::string_view) {});
  auto get = [&](const std::string& path, std::map<std::string, std::string> q = {}) {
    return svc.handle({"GET", path, std::move(q), ""});
  };

  const std::map<std::string, std::string> fq{{"lat", "51"}, {"lon", "11"}, {"date", "2020-12-16"}, {"var", "temp"}};
  const std::map<std::string, std::string> rq{{"from_lat", "51"}, {"from_lon", "10"}, {"to_lat", "51"},
                                              {"to_lon", "13"}, {"depart", "2020-12-16"}};
  struct Case {
    std::string method, path;
    std::map<std::string, std::string> query;
    std::string body;
    int status;
    std::string error;
  };
  auto with = [](auto q, const std::string& k, const std::string& v) {
    q[k] = v;
    return q;
  };
  auto without = [](auto q, const std::string& k) {
    q.erase(k);
    return q;
  };
  const std::vector<Case> table{
      {"GET", "/healthz", {}, "", 200, ""},
      {"GET", "/v1/forecast", fq, "", 200, ""},
      {"GET", "/v1/forecast", with(fq, "lat", "91"), "", 400, "bad_coords"},
      {"GET", "/v1/forecast", without(fq, "var"), "", 400, "missing_param"},
      {"GET", "/v1/forecast", with(fq, "date", "yesterday"), "", 400, "bad_date"},
      {"GET", "/v1/forecast", with(fq, "var", "wind"), "", 400, "unknown_variable"},
      {"GET", "/v1/route", rq, "", 200, ""},
      {"GET", "/v1/route", without(rq, "depart"), "", 400, "missing_param"},
      {"GET", "/v1/route", with(with(rq, "to_lat", "50"), "to_lon", "10.2"), "", 404, "no_route"},
      {"GET", "/v1/recommendations", {{"user", "alice"}, {"date", "2020-12-16"}}, "", 200, ""},
      {"GET", "/v1/recommendations", {{"user", "nobody"}}, "", 404, "unknown_user"},
      {"GET", "/v1/recommendations", {{"user", "alice"}, {"lambda", "7"}}, "", 400, "bad_param"},
      {"GET", "/v1/grid", {{"var", "temp"}, {"date", "2020-12-16"}}, "", 200, ""},
      {"GET", "/v1/grid", {{"var", "temp"}, {"date", "2020-12-16"}, {"format", "ppm"}}, "", 200, ""},
      {"GET", "/v1/grid", {{"var", "temp"}}, "", 400, "missing_param"},
      {"GET", "/v1/grid", {{"var", "temp"}, {"date", "2020-12-16"}, {"format", "gif"}}, "", 400, "bad_param"},
      {"GET", "/v1/clusters", {{"k", "3"}}, "", 200, ""},
      {"GET", "/v1/clusters", {{"k", "99"}}, "", 400, "k_too_large"},
      {"POST", "/v1/interactions", {}, R"({"user":"alice","location":"L404"})", 404, "unknown_location"},
      {"POST", "/v1/interactions", {}, "{]", 400, "bad_body"},
      {"POST", "/v1/interactions", {}, R"({"user":"u","location":"L1","weight":-2})", 400, "non_positive_weight"},
      {"GET", "/v1/missing", {}, "", 404, "not_found"},
  };
  for (const auto& t : table) {
    const auto r = svc.handle({t.method, t.path, t.query, t.body});
    c.expect(r.status == t.status && error_of(r) == t.error,
             t.method + " " + t.path + " -> " + std::to_string(r.status) + " " + error_of(r));
    c.expect(r.snapshot_version == 1, "snapshot version reported");
  }

  // grid shape and CLI byte equality
  const auto gj = json::parse(get("/v1/grid", {{"var", "temp"}, {"date", "2020-12-16"}}).body);
  c.expect(gj["values"].size() == gj["lats"].size() * gj["lons"].size(), "grid value count");
  {
    std::ostringstream o, e;
    const auto out = dir.path() / "cli.ppm";
    cli::run({"render", "--var", "temp", "--date", "2020-12-16", "--out", out.string(), "--store",
              files.config.snapshot_dir.string()},
             o, e);
    c.expect(fx::read_file(out) == get("/v1/grid", {{"var", "temp"}, {"date", "2020-12-16"}, {"format", "ppm"}}).body,
             "ppm equals CLI render");
  }
  c.expect(get("/v1/clusters", {{"k", "5"}}).body == get("/v1/clusters", {{"k", "5"}}).body,
           "repeated clusters identical");

  // GETs are side-effect free
  const auto sd = store::digest(*svc.store().current());
  const auto md = recsys::digest(*svc.matrix());
  for (const auto& t : table) {
    if (t.method == "GET") get(t.path, t.query);
  }
  c.expect(store::digest(*svc.store().current()) == sd, "store unchanged by GETs");
  c.expect(recsys::digest(*svc.matrix()) == md, "matrix unchanged by GETs");

  // POST then GET: the new user's top pick matches the oracle
  c.expect(svc.handle({"POST", "/v1/interactions", {}, R"({"user":"erin","location":"L4"})"}).status == 204,
           "interaction recorded");
  const auto m = svc.matrix();
  std::vector<std::vector<double>> dense;
  const auto users = m->users();
  for (const auto& u : users) {
    dense.emplace_back();
    for (const auto& [id, _] : m->locations()) dense.back().push_back(m->weight(u, id));
  }
  const auto ui = static_cast<std::size_t>(std::find(users.begin(), users.end(), "erin") - users.begin());
  const int top = oracle::recsys_top1(dense, ui);
  const auto rj = json::parse(get("/v1/recommendations", {{"user", "erin"}, {"lambda", "0"}, {"date", "2020-12-16"}}).body);
  c.expect(top >= 0 && rj["recommendations"][0]["location"] == "L" + std::to_string(top + 1),
           "POST then GET matches oracle");

  // 32 threads vs serial
  std::vector<service::ApiRequest> reqs;
  for (const auto& t : table) {
    if (t.method == "GET") reqs.push_back({t.method, t.path, t.query, t.body});
  }
  reqs.push_back({"GET", "/v1/clusters", {{"k", "4"}, {"format", "ppm"}}, ""});
  reqs.push_back({"GET", "/v1/forecast", with(fq, "date", "7/2100"), ""});
  std::vector<service::ApiResponse> serial;
  for (const auto& r : reqs) serial.push_back(svc.handle(r));
  std::vector<std::size_t> mismatches(32, 0);
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < 32; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = 0; i < reqs.size() * 2; ++i) {
          const std::size_t k = (i * 7 + t) % reqs.size();
          const auto r = svc.handle(reqs[k]);
          if (r.status != serial[k].status || r.body != serial[k].body) ++mismatches[t];
        }
      });
    }
  }
  std::size_t total = 0;
  for (auto x : mismatches) total += x;
  c.expect(total == 0, "32-thread payloads equal serial");

  // provider replay: corrupt file skipped, then versions 2 and 3, then nothing
  const auto v2 = svc.poll_once(), v3 = svc.poll_once(), none = svc.poll_once();
  c.expect(v2 && *v2 == 2 && v3 && *v3 == 3 && !none, "replay versions 2, 3, then idle");
  const auto fr = get("/v1/forecast", {{"lat", "50"}, {"lon", "10"}, {"date", "2020-12-21"}, {"var", "temp"}});
  c.expect(fr.snapshot_version == 3 && json::parse(fr.body)["value"] == 4.0, "replayed observation queryable");
  c.expect(get("/healthz").status == 200, "healthy after corrupt fixture");
  std::ostringstream o;
  o << table.size() << " contract cases, 32 threads x " << reqs.size() * 2 << " requests";
  return o.str();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string(Checker&)>>> criteria{
      {"netcdf-round-trip", netcdf_round_trip},
      {"persistence-identity", persistence_identity},
      {"trend-fit", trend_fit},
      {"kmeans", kmeans},
      {"collaborative-filter", collaborative_filter},
      {"router", router_oracle},
      {"render", render_goldens},
      {"service", service_contracts},
  };
  // Provider fixtures log skipped files on stderr; keep the report clean.
  std::cerr.setstate(std::ios::failbit);
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Checker c;
    std::string detail;
    try {
      detail = fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("threw: ") + e.what());
    }
    if (c.ok()) {
      std::cout << "PASS " << name << " (" << detail << ")\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << ": " << c.summary() << "\n";
    }
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
