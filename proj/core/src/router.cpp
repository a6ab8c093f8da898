#include "wxrec/router.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>

#include <json.hpp>

#include "wxrec/error.hpp"
#include "wxrec/forecast.hpp"

namespace wxrec::router {
namespace {

using json = nlohmann::json;

double line_length_km(const std::vector<GeoPoint>& pts) {
  double s = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) s += haversine_km(pts[i - 1], pts[i]);
  return s;
}

struct Interner {
  RoadGraph& graph;
  std::map<std::pair<long long, long long>, NodeId> ids;

  NodeId intern(const GeoPoint& p) {
    const std::pair<long long, long long> key{std::llround(p.lat() * 1e6), std::llround(p.lon() * 1e6)};
    auto it = ids.find(key);
    if (it != ids.end()) return it->second;
    const NodeId id = graph.add_node(p);
    ids.emplace(key, id);
    return id;
  }
};

std::vector<GeoPoint> read_line(const json& coords) {
  std::vector<GeoPoint> pts;
  for (const auto& c : coords) {
    if (!c.is_array() || c.size() < 2) throw Error(Errc::malformed_graph, "bad coordinate pair");
    pts.emplace_back(c[1].get<double>(), c[0].get<double>());
  }
  if (pts.size() < 2) throw Error(Errc::malformed_graph, "LineString needs two coordinates");
  return pts;
}

std::vector<NodeId> path_to(NodeId v, const std::vector<NodeId>& parent, NodeId source) {
  std::vector<NodeId> p{v};
  while (v != source) {
    v = parent[v];
    p.push_back(v);
  }
  std::reverse(p.begin(), p.end());
  return p;
}

}  // namespace

NodeId RoadGraph::add_node(const GeoPoint& p) {
  nodes_.push_back(p);
  adjacency_.emplace_back();
  return nodes_.size() - 1;
}

std::size_t RoadGraph::add_edge(NodeId a, NodeId b, double length_km, std::vector<GeoPoint> geometry) {
  if (a >= nodes_.size() || b >= nodes_.size()) {
    throw Error(Errc::malformed_graph, "edge endpoint does not exist");
  }
  if (!(length_km > 0.0) || !std::isfinite(length_km)) {
    throw Error(Errc::malformed_graph, "edge length must be positive and finite");
  }
  if (geometry.size() < 2) geometry = {nodes_[a], nodes_[b]};
  edges_.push_back({a, b, length_km, std::move(geometry)});
  const std::size_t e = edges_.size() - 1;
  adjacency_[a].push_back(e);
  if (b != a) adjacency_[b].push_back(e);
  return e;
}

RoadGraph parse_geojson(std::string_view text) {
  RoadGraph g;
  Interner interner{g, {}};
  try {
    const json doc = json::parse(text);
    if (doc.value("type", "") != "FeatureCollection" || !doc.contains("features")) {
      throw Error(Errc::malformed_graph, "expected a GeoJSON FeatureCollection");
    }
    for (const auto& f : doc.at("features")) {
      const json& geom = f.at("geometry");
      if (geom.is_null()) continue;
      const std::string type = geom.value("type", "");
      std::vector<std::vector<GeoPoint>> lines;
      if (type == "LineString") {
        lines.push_back(read_line(geom.at("coordinates")));
      } else if (type == "MultiLineString") {
        for (const auto& part : geom.at("coordinates")) lines.push_back(read_line(part));
      } else {
        continue;  // points, polygons: not part of the network
      }
      std::optional<double> declared;
      if (f.contains("properties") && f["properties"].is_object() &&
          f["properties"].contains("length_km") && !f["properties"]["length_km"].is_null()) {
        declared = f["properties"]["length_km"].get<double>();
      }
      for (auto& pts : lines) {
        const NodeId a = interner.intern(pts.front());
        const NodeId b = interner.intern(pts.back());
        if (a == b) continue;
        const double len = declared && lines.size() == 1 ? *declared : line_length_km(pts);
        g.add_edge(a, b, len, std::move(pts));
      }
    }
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_graph, std::string("bad GeoJSON: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::bad_coords) throw Error(Errc::malformed_graph, e.what());
    throw;
  }
  return g;
}

RoadGraph load_geojson(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::malformed_graph, "cannot open " + path);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_geojson(text);
}

void WeatherWeights::validate() const {
  for (double x : {alpha, p_ref_mm, rain_cap, beta}) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(Errc::invalid_argument, "router weights must be finite and non-negative");
    }
  }
  if (!(p_ref_mm > 0.0)) throw Error(Errc::invalid_argument, "reference precipitation must be > 0");
  if (!std::isfinite(t_snow_c)) throw Error(Errc::invalid_argument, "snow threshold must be finite");
}

double edge_cost(double length_km, double precip_mm, double temp_c, const WeatherWeights& w) {
  if (precip_mm < 0.0 || std::isnan(precip_mm)) {
    throw Error(Errc::negative_precip, "precipitation must be non-negative");
  }
  const double rain = w.alpha * std::min(precip_mm / w.p_ref_mm, w.rain_cap);
  const double snow = (precip_mm > 0.0 && temp_c <= w.t_snow_c) ? w.beta : 0.0;
  return length_km * (1.0 + rain + snow);
}

NodeId snap_to_node(const RoadGraph& graph, const GeoPoint& point) {
  if (graph.empty()) throw Error(Errc::empty_graph, "road graph has no nodes");
  NodeId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (NodeId id = 0; id < graph.node_count(); ++id) {
    const double d = haversine_km(point, graph.node(id));
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

GeoPoint edge_midpoint(const Edge& edge) {
  const auto& pts = edge.geometry;
  const double half = line_length_km(pts) / 2.0;
  double walked = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double seg = haversine_km(pts[i - 1], pts[i]);
    if (walked + seg >= half && seg > 0.0) {
      const double f = (half - walked) / seg;
      return GeoPoint(pts[i - 1].lat() + f * (pts[i].lat() - pts[i - 1].lat()),
                      pts[i - 1].lon() + f * (pts[i].lon() - pts[i - 1].lon()));
    }
    walked += seg;
  }
  return pts.front();
}

EdgeWeather weather_at(const store::StoreSnapshot& snapshot, const GeoPoint& point, Date date) {
  EdgeWeather w;
  auto sample = [&](store::VariableKind kind, double& out, bool& known) {
    const auto var = snapshot.variable_of_kind(kind);
    if (!var) return;
    try {
      out = forecast::forecast_at(snapshot, point, date, *var).value;
      known = true;
    } catch (const Error& e) {
      if (e.code() != Errc::no_data) throw;
    }
  };
  sample(store::VariableKind::rainfall, w.precip_mm, w.precip_known);
  sample(store::VariableKind::temperature, w.temp_c, w.temp_known);
  if (w.precip_mm < 0.0) w.precip_mm = 0.0;
  return w;
}

std::optional<PathResult> shortest_path(const RoadGraph& graph, NodeId from, NodeId to,
                                        std::span<const double> edge_costs) {
  const std::size_t n = graph.node_count();
  if (from >= n || to >= n) throw Error(Errc::invalid_argument, "node id out of range");
  if (edge_costs.size() != graph.edge_count()) {
    throw Error(Errc::invalid_argument, "one cost per edge required");
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<NodeId> parent(n, from);
  std::vector<std::size_t> parent_edge(n, 0);
  std::vector<bool> settled(n, false);

  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[from] = 0.0;
  heap.push({0.0, from});
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u] || d != dist[u]) continue;
    settled[u] = true;
    if (u == to) break;
    for (std::size_t e : graph.incident(u)) {
      const Edge& edge = graph.edge(e);
      const NodeId v = edge.a == u ? edge.b : edge.a;
      if (settled[v]) continue;
      const double nd = d + edge_costs[e];
      bool better = nd < dist[v];
      if (!better && nd == dist[v]) {
        auto candidate = path_to(u, parent, from);
        candidate.push_back(v);
        better = candidate < path_to(v, parent, from);
        // Same node sequence via a parallel edge: keep the lower edge index.
        if (!better && candidate == path_to(v, parent, from) && parent[v] == u) {
          better = e < parent_edge[v];
        }
      }
      if (better) {
        dist[v] = nd;
        parent[v] = u;
        parent_edge[v] = e;
        heap.push({nd, v});
      }
    }
  }
  if (!settled[to]) return std::nullopt;

  PathResult r;
  r.nodes = path_to(to, parent, from);
  for (std::size_t i = 1; i < r.nodes.size(); ++i) {
    const std::size_t e = parent_edge[r.nodes[i]];
    r.edges.push_back(e);
    r.cost += edge_costs[e];
  }
  return r;
}

RouteResult best_path(const RoadGraph& graph, const GeoPoint& origin, const GeoPoint& destination,
                      Date depart, const store::StoreSnapshot* snapshot,
                      const WeatherWeights& weights) {
  weights.validate();
  if (graph.empty()) throw Error(Errc::empty_graph, "road graph has no nodes");
  const bool weather = weights.needs_weather();
  if (weather && (snapshot == nullptr || snapshot->is_empty())) {
    throw Error(Errc::empty_store, "weather-costed routing needs a non-empty store");
  }

  std::vector<EdgeWeather> edge_weather(graph.edge_count());
  std::vector<double> costs(graph.edge_count());
  for (std::size_t e = 0; e < graph.edge_count(); ++e) {
    const Edge& edge = graph.edge(e);
    if (weather) edge_weather[e] = weather_at(*snapshot, edge_midpoint(edge), depart);
    const auto& w = edge_weather[e];
    const double temp = w.temp_known ? w.temp_c : std::numeric_limits<double>::infinity();
    costs[e] = edge_cost(edge.length_km, w.precip_mm, temp, weights);
  }

  const NodeId from = snap_to_node(graph, origin);
  const NodeId to = snap_to_node(graph, destination);
  const auto path = shortest_path(graph, from, to, costs);
  if (!path) throw Error(Errc::no_route, "destination is not reachable from origin");

  RouteResult r;
  r.depart = depart;
  r.nodes = path->nodes;
  for (NodeId id : r.nodes) r.coordinates.push_back(graph.node(id));
  for (std::size_t i = 0; i < path->edges.size(); ++i) {
    const std::size_t e = path->edges[i];
    RouteLeg leg{e, r.nodes[i], r.nodes[i + 1], graph.edge(e).length_km, edge_weather[e], costs[e]};
    r.total_cost += leg.cost;
    r.total_length += leg.length_km;
    r.legs.push_back(leg);
  }
  return r;
}

}  // namespace wxrec::router
