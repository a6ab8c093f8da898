#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wxrec/calendar.hpp"
#include "wxrec/geo.hpp"
#include "wxrec/ncgrid.hpp"

namespace wxrec::store {

using nc::VariableKind;

/// Observations of one variable at one grid cell, in increasing time order.
struct CellSeries {
  std::string variable;
  VariableKind kind = VariableKind::other;
  CellKey cell;
  std::vector<Date> times;
  std::vector<double> values;

  bool empty() const { return times.empty(); }
  std::size_t size() const { return times.size(); }
};

struct VariableInfo {
  std::string name;
  VariableKind kind = VariableKind::other;
  std::string units;
};

struct ProvenanceEntry {
  std::string source;
  std::uint64_t observations = 0;
  std::uint64_t replaced = 0;  // duplicates resolved in favour of this source
};

/// Per-cell storage. Days are sorted and unique.
struct CellData {
  std::vector<std::int64_t> days;
  std::vector<float> values;
};

struct Column {
  VariableInfo info;
  std::vector<CellData> cells;  // lat-major: lat_idx * nlon + lon_idx
};

class StoreSnapshot;
using SnapshotPtr = std::shared_ptr<const StoreSnapshot>;

/// An immutable version of the store. Everything reachable from a snapshot
/// is const; later ingests produce new snapshots and share unchanged columns.
class StoreSnapshot {
 public:
  static SnapshotPtr empty();

  std::uint64_t version() const { return version_; }
  const std::vector<double>& lats() const { return lats_; }
  const std::vector<double>& lons() const { return lons_; }
  const std::vector<ProvenanceEntry>& provenance() const { return provenance_; }
  bool is_empty() const { return lats_.empty() || lons_.empty(); }
  std::size_t cell_count() const { return lats_.size() * lons_.size(); }
  std::size_t cell_index(CellKey c) const { return c.lat_idx * lons_.size() + c.lon_idx; }
  CellKey cell_at(std::size_t index) const { return {index / lons_.size(), index % lons_.size()}; }

  std::vector<VariableInfo> variables() const;
  bool has_variable(std::string_view name) const;
  const Column& column(std::string_view name) const;

  /// First variable (by name) of the given kind.
  std::optional<std::string> variable_of_kind(VariableKind kind) const;

  /// Resolves either a stored variable name or a kind name ("temperature").
  /// Throws Error(unknown_variable).
  std::string resolve_variable(std::string_view name_or_kind) const;

 private:
  friend class SnapshotBuilder;
  StoreSnapshot() = default;

  std::uint64_t version_ = 0;
  std::vector<double> lats_;
  std::vector<double> lons_;
  std::map<std::string, std::shared_ptr<const Column>, std::less<>> columns_;
  std::vector<ProvenanceEntry> provenance_;
};

/// A single point observation arriving from an upstream provider.
struct Observation {
  std::variant<GeoPoint, CellKey> where;
  std::string variable;
  Date day;
  double value = 0.0;
};

/// Returns a new snapshot holding the union of `base` and `dataset`
/// (version = base + 1). Duplicate (cell, variable, day) keys keep the new
/// value. Temperatures in Kelvin and pressures in Pa are converted.
/// Throws Error(axis_mismatch) or Error(empty_input).
SnapshotPtr ingest(const StoreSnapshot& base, const nc::GridDataset& dataset,
                   std::string source_id);

SnapshotPtr ingest_csv(const StoreSnapshot& base, std::string_view csv_text,
                       std::string source_id);

/// Point observations onto the existing grid of `base`. Geographic points
/// resolve to their nearest cell. Throws Error(empty_store) if `base` has no
/// grid yet.
SnapshotPtr ingest_observations(const StoreSnapshot& base, std::span<const Observation> obs,
                                std::string source_id);

/// Cell whose centre has the smallest haversine distance to `point`;
/// ties go to the lower lat_idx, then the lower lon_idx.
CellKey nearest_cell(const StoreSnapshot& snapshot, const GeoPoint& point);

/// Observations within [start, end] inclusive. May be empty.
CellSeries series(const StoreSnapshot& snapshot, CellKey cell, std::string_view variable,
                  Date start = Date{std::numeric_limits<std::int64_t>::min()},
                  Date end = Date{std::numeric_limits<std::int64_t>::max()});

/// Order-sensitive FNV-1a digest over the snapshot's full contents.
std::uint64_t digest(const StoreSnapshot& snapshot);

/// Holds the latest published snapshot. Readers take a reference-counted
/// copy of the pointer and never wait on ingestion; writers are serialized.
class Store {
 public:
  explicit Store(SnapshotPtr initial = StoreSnapshot::empty());

  SnapshotPtr current() const;

  /// Publishes `next` if its version is newer than the current one.
  /// Returns the snapshot that is current afterwards.
  SnapshotPtr publish(SnapshotPtr next);

  /// Builds from the current snapshot and publishes, under the writer lock.
  SnapshotPtr ingest(const nc::GridDataset& dataset, std::string source_id);
  SnapshotPtr ingest_observations(std::span<const Observation> obs, std::string source_id);

 private:
  mutable std::mutex ptr_mutex_;
  std::mutex writer_mutex_;
  SnapshotPtr current_;
};

// Snapshot directory layout: <root>/v<version, 6 digits>/{manifest.json, <var>.col}

/// Writes the snapshot into a fresh version directory under `root`
/// (written to a temporary name, then renamed). Returns the directory.
std::filesystem::path save_snapshot(const StoreSnapshot& snapshot,
                                    const std::filesystem::path& root);

SnapshotPtr load_snapshot(const std::filesystem::path& version_dir);

/// Highest version under `root`, or an empty snapshot when there is none.
SnapshotPtr load_latest(const std::filesystem::path& root);

}  // namespace wxrec::store
