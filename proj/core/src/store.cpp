#include <algorithm>
#include <cmath>
#include <cstring>

#include "snapshot_builder.hpp"
#include "wxrec/error.hpp"
#include "wxrec/store.hpp"

namespace wxrec::store {
namespace {

// Axes from different sources (float file vs decimal CSV) agree to ~1 m.
constexpr double kAxisTolerance = 1e-5;

bool same_axis(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > kAxisTolerance) return false;
  }
  return true;
}

struct Pending {
  std::vector<std::int64_t> days;
  std::vector<float> values;
};

// Merges sorted `incoming` into sorted `base`; incoming wins on equal days.
CellData merge(const CellData& base, const Pending& incoming, std::uint64_t& replaced) {
  CellData out;
  out.days.reserve(base.days.size() + incoming.days.size());
  out.values.reserve(base.days.size() + incoming.days.size());
  std::size_t i = 0, j = 0;
  while (i < base.days.size() || j < incoming.days.size()) {
    if (j == incoming.days.size() || (i < base.days.size() && base.days[i] < incoming.days[j])) {
      out.days.push_back(base.days[i]);
      out.values.push_back(base.values[i]);
      ++i;
    } else {
      if (i < base.days.size() && base.days[i] == incoming.days[j]) {
        ++replaced;
        ++i;
      }
      out.days.push_back(incoming.days[j]);
      out.values.push_back(incoming.values[j]);
      ++j;
    }
  }
  return out;
}

// Appends keeping days sorted-unique; a repeated day overwrites (last wins).
void push(Pending& p, std::int64_t day, float value) {
  if (!p.days.empty() && p.days.back() == day) {
    p.values.back() = value;
    return;
  }
  if (!p.days.empty() && p.days.back() > day) {
    auto it = std::lower_bound(p.days.begin(), p.days.end(), day);
    const auto k = static_cast<std::size_t>(it - p.days.begin());
    if (it != p.days.end() && *it == day) {
      p.values[k] = value;
    } else {
      p.days.insert(it, day);
      p.values.insert(p.values.begin() + static_cast<std::ptrdiff_t>(k), value);
    }
    return;
  }
  p.days.push_back(day);
  p.values.push_back(value);
}

struct StagedVariable {
  VariableInfo info;
  std::vector<Pending> cells;
};

SnapshotPtr commit(const StoreSnapshot& base, std::vector<double> lats, std::vector<double> lons,
                   std::map<std::string, StagedVariable>& staged, std::string source_id) {
  SnapshotBuilder b(base);
  b.set_version(base.version() + 1);
  if (base.is_empty()) b.set_axes(std::move(lats), std::move(lons));
  const std::size_t ncells = b.peek().cell_count();

  ProvenanceEntry prov;
  prov.source = std::move(source_id);
  for (auto& [name, sv] : staged) {
    auto col = std::make_shared<Column>();
    const Column* old = base.has_variable(name) ? &base.column(name) : nullptr;
    col->info = old != nullptr ? old->info : sv.info;
    col->cells.resize(ncells);
    for (std::size_t c = 0; c < ncells; ++c) {
      prov.observations += sv.cells[c].days.size();
      if (old != nullptr) {
        col->cells[c] = merge(old->cells[c], sv.cells[c], prov.replaced);
      } else {
        col->cells[c].days = std::move(sv.cells[c].days);
        col->cells[c].values = std::move(sv.cells[c].values);
      }
    }
    b.set_column(name, std::move(col));
  }
  b.add_provenance(std::move(prov));
  return b.finish();
}

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

template <class T>
void fnv_value(std::uint64_t& h, const T& v) {
  fnv(h, &v, sizeof v);
}

}  // namespace

SnapshotPtr StoreSnapshot::empty() {
  static const SnapshotPtr e = SnapshotBuilder().finish();
  return e;
}

std::vector<VariableInfo> StoreSnapshot::variables() const {
  std::vector<VariableInfo> out;
  for (const auto& [name, col] : columns_) out.push_back(col->info);
  return out;
}

bool StoreSnapshot::has_variable(std::string_view name) const {
  return columns_.find(name) != columns_.end();
}

const Column& StoreSnapshot::column(std::string_view name) const {
  auto it = columns_.find(name);
  if (it == columns_.end()) {
    throw Error(Errc::unknown_variable, "no variable '" + std::string(name) + "' in store");
  }
  return *it->second;
}

std::optional<std::string> StoreSnapshot::variable_of_kind(VariableKind kind) const {
  for (const auto& [name, col] : columns_) {
    if (col->info.kind == kind) return name;
  }
  return std::nullopt;
}

std::string StoreSnapshot::resolve_variable(std::string_view name_or_kind) const {
  if (has_variable(name_or_kind)) return std::string(name_or_kind);
  if (auto kind = nc::parse_kind(name_or_kind)) {
    if (auto name = variable_of_kind(*kind)) return *name;
  }
  throw Error(Errc::unknown_variable, "no variable '" + std::string(name_or_kind) + "' in store");
}

SnapshotPtr ingest(const StoreSnapshot& base, const nc::GridDataset& ds, std::string source_id) {
  if (ds.fields.empty() || ds.times.empty() || ds.lats.empty() || ds.lons.empty()) {
    throw Error(Errc::empty_input, "dataset has no observations");
  }
  if (!base.is_empty() && (!same_axis(base.lats(), ds.lats) || !same_axis(base.lons(), ds.lons))) {
    throw Error(Errc::axis_mismatch, "dataset grid differs from the store grid");
  }

  std::vector<std::int64_t> days(ds.times.size());
  for (std::size_t t = 0; t < ds.times.size(); ++t) {
    const double d = std::floor(ds.times[t] * ds.days_per_time_unit + 1e-9);
    days[t] = ds.time_epoch.days + static_cast<std::int64_t>(d);
  }

  const std::size_t ncells = ds.cells_per_step();
  std::map<std::string, StagedVariable> staged;
  for (const auto& [name, field] : ds.fields) {
    StagedVariable sv;
    sv.info = {name, field.kind, nc::canonical_units(field.kind, field.units)};
    sv.cells.resize(ncells);
    for (std::size_t t = 0; t < ds.times.size(); ++t) {
      for (std::size_t c = 0; c < ncells; ++c) {
        const std::size_t k = t * ncells + c;
        if (field.masked(k)) continue;
        const double v = nc::to_canonical_units(field.kind, field.units, field.values[k]);
        if (!std::isfinite(v)) continue;
        push(sv.cells[c], days[t], static_cast<float>(v));
      }
    }
    staged.emplace(name, std::move(sv));
  }
  return commit(base, ds.lats, ds.lons, staged, std::move(source_id));
}

SnapshotPtr ingest_csv(const StoreSnapshot& base, std::string_view csv_text, std::string source_id) {
  return ingest(base, nc::parse_csv(csv_text), std::move(source_id));
}

SnapshotPtr ingest_observations(const StoreSnapshot& base, std::span<const Observation> obs,
                                std::string source_id) {
  if (base.is_empty()) throw Error(Errc::empty_store, "store has no grid to place observations on");
  if (obs.empty()) throw Error(Errc::empty_input, "no observations");

  std::map<std::string, StagedVariable> staged;
  for (const auto& o : obs) {
    CellKey cell;
    if (const auto* p = std::get_if<GeoPoint>(&o.where)) {
      cell = nearest_cell(base, *p);
    } else {
      cell = std::get<CellKey>(o.where);
      if (cell.lat_idx >= base.lats().size() || cell.lon_idx >= base.lons().size()) {
        throw Error(Errc::cell_out_of_range, "observation cell outside the grid");
      }
    }
    auto it = staged.find(o.variable);
    if (it == staged.end()) {
      StagedVariable sv;
      if (base.has_variable(o.variable)) {
        sv.info = base.column(o.variable).info;
      } else {
        sv.info = {o.variable, nc::classify_variable(o.variable, ""), ""};
        sv.info.units = nc::canonical_units(sv.info.kind, "");
      }
      sv.cells.resize(base.cell_count());
      it = staged.emplace(o.variable, std::move(sv)).first;
    }
    push(it->second.cells[base.cell_index(cell)], o.day.days, static_cast<float>(o.value));
  }
  return commit(base, {}, {}, staged, std::move(source_id));
}

CellKey nearest_cell(const StoreSnapshot& snapshot, const GeoPoint& point) {
  if (snapshot.is_empty()) throw Error(Errc::empty_store, "store is empty");
  CellKey best;
  double best_d = std::numeric_limits<double>::infinity();
  const auto& lats = snapshot.lats();
  const auto& lons = snapshot.lons();
  for (std::size_t i = 0; i < lats.size(); ++i) {
    for (std::size_t j = 0; j < lons.size(); ++j) {
      const double d = haversine_km(point.lat(), point.lon(), lats[i], lons[j]);
      if (d < best_d) {
        best_d = d;
        best = {i, j};
      }
    }
  }
  return best;
}

CellSeries series(const StoreSnapshot& snapshot, CellKey cell, std::string_view variable, Date start,
                  Date end) {
  if (cell.lat_idx >= snapshot.lats().size() || cell.lon_idx >= snapshot.lons().size()) {
    throw Error(Errc::cell_out_of_range, "cell outside the grid");
  }
  const Column& col = snapshot.column(variable);
  const CellData& data = col.cells[snapshot.cell_index(cell)];

  CellSeries out;
  out.variable = col.info.name;
  out.kind = col.info.kind;
  out.cell = cell;
  auto lo = std::lower_bound(data.days.begin(), data.days.end(), start.days);
  auto hi = std::upper_bound(data.days.begin(), data.days.end(), end.days);
  for (auto it = lo; it < hi; ++it) {
    const auto k = static_cast<std::size_t>(it - data.days.begin());
    out.times.push_back(Date{*it});
    out.values.push_back(static_cast<double>(data.values[k]));
  }
  return out;
}

std::uint64_t digest(const StoreSnapshot& s) {
  std::uint64_t h = 14695981039346656037ull;
  fnv_value(h, s.version());
  for (double v : s.lats()) fnv_value(h, v);
  for (double v : s.lons()) fnv_value(h, v);
  for (const auto& info : s.variables()) {
    fnv(h, info.name.data(), info.name.size());
    fnv_value(h, info.kind);
    const Column& col = s.column(info.name);
    for (const auto& cell : col.cells) {
      fnv_value(h, cell.days.size());
      if (!cell.days.empty()) {
        fnv(h, cell.days.data(), cell.days.size() * sizeof(std::int64_t));
        fnv(h, cell.values.data(), cell.values.size() * sizeof(float));
      }
    }
  }
  for (const auto& p : s.provenance()) {
    fnv(h, p.source.data(), p.source.size());
    fnv_value(h, p.observations);
    fnv_value(h, p.replaced);
  }
  return h;
}

Store::Store(SnapshotPtr initial) : current_(std::move(initial)) {
  if (!current_) current_ = StoreSnapshot::empty();
}

SnapshotPtr Store::current() const {
  std::lock_guard lock(ptr_mutex_);
  return current_;
}

SnapshotPtr Store::publish(SnapshotPtr next) {
  std::lock_guard lock(ptr_mutex_);
  if (next && next->version() > current_->version()) current_ = std::move(next);
  return current_;
}

SnapshotPtr Store::ingest(const nc::GridDataset& dataset, std::string source_id) {
  std::lock_guard writer(writer_mutex_);
  return publish(store::ingest(*current(), dataset, std::move(source_id)));
}

SnapshotPtr Store::ingest_observations(std::span<const Observation> obs, std::string source_id) {
  std::lock_guard writer(writer_mutex_);
  return publish(store::ingest_observations(*current(), obs, std::move(source_id)));
}

}  // namespace wxrec::store
