#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wxrec/calendar.hpp"
#include "wxrec/geo.hpp"
#include "wxrec/store.hpp"

namespace wxrec::router {

using NodeId = std::size_t;

struct Edge {
  NodeId a = 0;
  NodeId b = 0;
  double length_km = 0.0;
  std::vector<GeoPoint> geometry;  // at least the two endpoints
};

/// Undirected road network. Parallel edges are allowed.
class RoadGraph {
 public:
  NodeId add_node(const GeoPoint& p);

  /// Throws Error(malformed_graph) for unknown endpoints or a length that
  /// is not positive and finite.
  std::size_t add_edge(NodeId a, NodeId b, double length_km, std::vector<GeoPoint> geometry = {});

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }
  const GeoPoint& node(NodeId id) const { return nodes_.at(id); }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::size_t>& incident(NodeId id) const { return adjacency_.at(id); }

 private:
  std::vector<GeoPoint> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Reads a GeoJSON FeatureCollection of LineString features. Each feature
/// is one edge between its first and last coordinate; `length_km` comes from
/// the feature property or the haversine length of the line. Endpoints are
/// interned on a 1e-6 degree grid.
RoadGraph parse_geojson(std::string_view text);
RoadGraph load_geojson(const std::string& path);

struct WeatherWeights {
  double alpha = 0.5;       // rain penalty coefficient
  double p_ref_mm = 5.0;    // reference precipitation
  double rain_cap = 4.0;    // cap on precip / p_ref
  double beta = 2.0;        // snow penalty
  double t_snow_c = 0.0;    // snow when precip > 0 and temp <= this

  /// Throws Error(invalid_argument) on negative values or p_ref <= 0.
  void validate() const;
  bool needs_weather() const { return alpha != 0.0 || beta != 0.0; }
};

/// length * (1 + alpha * min(precip / p_ref, rain_cap) + beta * [precip > 0 && temp <= t_snow]).
/// Throws Error(negative_precip).
double edge_cost(double length_km, double precip_mm, double temp_c, const WeatherWeights& w);

/// Closest node by haversine distance; ties go to the lower id.
NodeId snap_to_node(const RoadGraph& graph, const GeoPoint& point);

struct EdgeWeather {
  double precip_mm = 0.0;
  double temp_c = 0.0;
  bool precip_known = false;
  bool temp_known = false;
};

/// Weather at an edge's midpoint on the departure date. Missing variables or
/// cells without data read as dry and warm.
EdgeWeather weather_at(const store::StoreSnapshot& snapshot, const GeoPoint& point, Date date);

/// Point halfway along the edge geometry by haversine length.
GeoPoint edge_midpoint(const Edge& edge);

struct RouteLeg {
  std::size_t edge = 0;
  NodeId from = 0;
  NodeId to = 0;
  double length_km = 0.0;
  EdgeWeather weather;
  double cost = 0.0;
};

struct RouteResult {
  std::vector<NodeId> nodes;
  std::vector<GeoPoint> coordinates;
  std::vector<RouteLeg> legs;
  double total_cost = 0.0;
  double total_length = 0.0;
  Date depart;
};

/// Dijkstra between two nodes over caller-supplied per-edge costs. Among
/// equal-cost paths the lexicographically smallest node sequence wins.
/// Returns nullopt when `to` is unreachable.
struct PathResult {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> edges;
  double cost = 0.0;
};
std::optional<PathResult> shortest_path(const RoadGraph& graph, NodeId from, NodeId to,
                                        std::span<const double> edge_costs);

/// Weather-costed best route between the nodes nearest to `origin` and
/// `destination`. `snapshot` may be null when the weights ignore weather.
/// Throws Error(empty_graph), Error(no_route), Error(empty_store).
RouteResult best_path(const RoadGraph& graph, const GeoPoint& origin, const GeoPoint& destination,
                      Date depart, const store::StoreSnapshot* snapshot,
                      const WeatherWeights& weights = {});

}  // namespace wxrec::router
