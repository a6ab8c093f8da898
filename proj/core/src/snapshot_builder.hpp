#pragma once

#include "wxrec/store.hpp"

namespace wxrec::store {

/// Internal mutable staging area for a StoreSnapshot.
class SnapshotBuilder {
 public:
  SnapshotBuilder() : snap_(new StoreSnapshot()) {}

  /// Starts from a copy of `base` (columns shared, not copied).
  explicit SnapshotBuilder(const StoreSnapshot& base) : snap_(new StoreSnapshot(base)) {}

  void set_version(std::uint64_t v) { snap_->version_ = v; }
  void set_axes(std::vector<double> lats, std::vector<double> lons) {
    snap_->lats_ = std::move(lats);
    snap_->lons_ = std::move(lons);
  }
  void set_column(const std::string& name, std::shared_ptr<const Column> column) {
    snap_->columns_[name] = std::move(column);
  }
  void add_provenance(ProvenanceEntry entry) { snap_->provenance_.push_back(std::move(entry)); }

  const StoreSnapshot& peek() const { return *snap_; }

  SnapshotPtr finish() { return SnapshotPtr(std::move(snap_)); }

 private:
  std::unique_ptr<StoreSnapshot> snap_;
};

}  // namespace wxrec::store
