#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wxrec/calendar.hpp"
#include "wxrec/store.hpp"

namespace wxrec::provider {

/// A batch of point observations from an upstream weather provider.
struct ProviderBatch {
  std::string source;
  std::vector<store::Observation> observations;
};

/// Parses the fixture/wire format:
///   {"source": "...", "observations": [
///      {"lat": 52.1, "lon": 4.3, "variable": "temp", "time": "2024-01-02", "value": 3.5},
///      {"cell": {"lat_idx": 0, "lon_idx": 1}, "variable": "precip", "time": "...", "value": 0}]}
/// Rejects timestamps after `today` and non-finite values with
/// Error(fixture_corrupt).
ProviderBatch parse_batch(std::string_view json_text, Date today);

/// Client contract for an upstream provider. A live HTTP client would
/// implement the same interface; the service only ever sees batches.
class ProviderClient {
 public:
  virtual ~ProviderClient() = default;

  /// Next available batch, or nullopt when nothing new is available.
  virtual std::optional<ProviderBatch> next() = 0;
};

/// Replays `*.json` fixture files from a directory in lexicographic order.
/// Corrupt files are logged and skipped; once every file has been consumed
/// `next()` keeps returning nullopt.
class ReplayProvider : public ProviderClient {
 public:
  explicit ReplayProvider(std::filesystem::path dir, Date today = today_utc());

  std::optional<ProviderBatch> next() override;

  const std::vector<std::string>& skipped() const { return skipped_; }

 private:
  std::filesystem::path dir_;
  Date today_;
  std::string cursor_;  // last consumed file name
  std::vector<std::string> skipped_;
};

/// Geographic filter applied to polled observations.
struct Region {
  double lat_min = -90.0;
  double lat_max = 90.0;
  double lon_min = -180.0;
  double lon_max = 180.0;

  bool contains(const GeoPoint& p) const {
    return p.lat() >= lat_min && p.lat() <= lat_max && p.lon() >= lon_min && p.lon() <= lon_max;
  }
};

/// Pulls one batch from `client`, keeps observations inside `region`, and
/// publishes the resulting snapshot. Returns the published snapshot, or
/// nullopt when there was nothing to ingest.
std::optional<store::SnapshotPtr> poll_provider(ProviderClient& client, store::Store& store,
                                                const Region& region = {});

}  // namespace wxrec::provider
