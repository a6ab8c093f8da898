#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wxrec/calendar.hpp"
#include "wxrec/geo.hpp"
#include "wxrec/store.hpp"

namespace wxrec::recsys {

struct Location {
  std::string id;
  GeoPoint point;
};

struct Interaction {
  double weight = 0.0;
  std::string last_updated;  // ISO-8601 UTC
};

/// The N users x M locations matrix of implicit interaction weights.
/// Rows and columns are kept in id order so every traversal is
/// deterministic.
class InteractionMatrix {
 public:
  /// Throws Error(invalid_argument) on a duplicate or empty id.
  void add_location(Location location);
  void add_user(const std::string& user);

  /// Adds `weight` to (user, location), registering the user if new.
  /// Throws Error(unknown_location) or Error(non_positive_weight).
  void record_interaction(const std::string& user, const std::string& location, double weight,
                          std::string timestamp = {});

  /// Replaces the stored entry; used when loading persisted matrices.
  void set_entry(const std::string& user, const std::string& location, double weight,
                 std::string timestamp);

  bool has_user(std::string_view user) const;
  bool has_location(std::string_view location) const;
  const Location& location(std::string_view id) const;
  double weight(std::string_view user, std::string_view location) const;

  const std::map<std::string, Location, std::less<>>& locations() const { return locations_; }
  std::vector<std::string> users() const;
  const std::map<std::string, Interaction, std::less<>>& row(std::string_view user) const;

  std::size_t user_count() const { return rows_.size(); }
  std::size_t location_count() const { return locations_.size(); }

 private:
  std::map<std::string, Location, std::less<>> locations_;
  std::map<std::string, std::map<std::string, Interaction, std::less<>>, std::less<>> rows_;
};

/// Cosine similarity of the two users' weight vectors, clamped to [0, 1];
/// 0 when either vector is all zero. Throws Error(unknown_user).
double user_similarity(const InteractionMatrix& m, std::string_view u, std::string_view v);

/// Similarity-weighted mean of the location's weight over the k most
/// similar users with positive similarity (ties by user id). 0 when there is
/// no such neighbour.
double predict_score(const InteractionMatrix& m, std::string_view user, std::string_view location,
                     std::size_t k);

/// Weather comfort in [0, 1]: 1 - min(|T - 21| / 20, 1), times
/// max(0, 1 - precip / 10) when precipitation is known.
double comfort_score(double temperature_c, std::optional<double> precip_mm);

struct Recommendation {
  std::string location;
  double cf_score = 0.0;       // normalized to [0, 1] across candidates
  double raw_cf_score = 0.0;   // before normalization
  double comfort_score = 0.0;
  bool comfort_known = false;
  double blended_score = 0.0;
  std::size_t rank = 0;        // 1-based
};

struct RecommendOptions {
  std::size_t n = 10;
  double lambda = 0.3;
  std::size_t k = 10;
};

/// Ranks locations the user has not visited by
/// (1 - lambda) * cf_norm + lambda * comfort. Users with an all-zero row fall
/// back to global popularity (column sums). `snapshot` may be null only when
/// lambda is 0. Throws Error(unknown_user) / Error(empty_store).
std::vector<Recommendation> recommend(const InteractionMatrix& m, std::string_view user,
                                      const RecommendOptions& options,
                                      const store::StoreSnapshot* snapshot, Date target_date);

/// JSON lines, one object per entry: {user, location, weight, last_updated}.
std::string to_jsonl(const InteractionMatrix& m);

/// Loads entries into a matrix whose locations are already registered.
void load_jsonl(InteractionMatrix& m, std::string_view text);

/// Locations file: JSON array of {id, lat, lon}.
std::vector<Location> parse_locations(std::string_view json_text);

std::uint64_t digest(const InteractionMatrix& m);

/// Current UTC time as ISO-8601 with seconds.
std::string utc_timestamp();

}  // namespace wxrec::recsys
