#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wxrec/calendar.hpp"

namespace wxrec::nc {

enum class Format { classic_v1, classic_v2, unsupported };

/// External type codes of the classic container.
enum class NcType : std::uint32_t {
  byte_ = 1,
  char_ = 2,
  short_ = 3,
  int_ = 4,
  float_ = 5,
  double_ = 6,
};

/// Size in bytes of one element on disk.
std::size_t type_width(NcType t);

/// Default fill value used when a variable carries no _FillValue attribute.
double default_fill(NcType t);

struct NcDimension {
  std::string name;
  std::uint64_t length = 0;  // 0 marks the record (unlimited) dimension

  bool is_record() const { return length == 0; }
};

struct NcAttribute {
  std::string name;
  NcType type = NcType::char_;
  std::string text;             // for char attributes
  std::vector<double> numbers;  // for every other type
};

struct NcVariable {
  std::string name;
  std::vector<std::size_t> dim_ids;
  std::vector<NcAttribute> attributes;
  NcType type = NcType::float_;
  std::uint64_t vsize = 0;  // as computed by the parser (padded)
  std::uint64_t begin = 0;
  bool is_record = false;

  const NcAttribute* attribute(std::string_view attr_name) const;
};

struct NcHeader {
  Format format = Format::unsupported;
  std::uint64_t numrecs = 0;
  std::vector<NcDimension> dims;
  std::vector<NcAttribute> global_attributes;
  std::vector<NcVariable> vars;
  std::uint64_t record_size = 0;  // bytes between consecutive records

  std::optional<std::size_t> find_dim(std::string_view name) const;
  const NcVariable* find_var(std::string_view name) const;
};

/// Physical quantity a grid field represents.
enum class VariableKind { temperature, pressure, rainfall, other };

std::string_view to_string(VariableKind kind);
std::optional<VariableKind> parse_kind(std::string_view text);

/// Guess the quantity from a variable's name, units and standard_name.
VariableKind classify_variable(std::string_view name, std::string_view units,
                               std::string_view standard_name = {});

/// One decoded grid variable, indexed [time][lat][lon].
struct Field {
  VariableKind kind = VariableKind::other;
  std::string units;
  NcType source_type = NcType::double_;
  std::vector<double> values;
  std::vector<std::uint8_t> mask;  // 1 = missing/fill

  bool masked(std::size_t i) const { return mask[i] != 0; }
};

struct GridDataset {
  std::vector<double> lats;
  std::vector<double> lons;
  std::vector<double> times;  // in units of `time_units` since `time_epoch`
  std::string time_units;
  Date time_epoch;
  double days_per_time_unit = 1.0;
  NcType lat_type = NcType::double_;
  NcType lon_type = NcType::double_;
  NcType time_type = NcType::double_;
  std::map<std::string, Field> fields;

  std::size_t cells_per_step() const { return lats.size() * lons.size(); }
  std::size_t value_count() const { return times.size() * cells_per_step(); }
  std::size_t index(std::size_t t, std::size_t lat, std::size_t lon) const {
    return (t * lats.size() + lat) * lons.size() + lon;
  }
};

/// Classifies the first four bytes. Fewer than four bytes is `unsupported`.
Format detect_format(std::span<const std::byte> prefix);

/// Header-only decode with full structural validation.
NcHeader parse_header(std::span<const std::byte> file);

/// Decode a classic-format file into a gridded dataset. Axes come from
/// variables named lat/latitude and lon/longitude (case-insensitive); the
/// record dimension, or a dimension named "time", is the time axis.
GridDataset parse_classic(std::span<const std::byte> file);

GridDataset read_classic_file(const std::filesystem::path& path);

/// Returns the stored field unchanged. Throws Error(unknown_variable).
const Field& read_variable(const GridDataset& dataset, std::string_view name);

/// CSV with header `time,lat,lon,<vars...>`, time-major then lat then lon.
/// Missing cells are empty fields. An empty `variables` list means every
/// field, in name order.
std::string convert_to_csv(const GridDataset& dataset,
                           std::span<const std::string> variables = {});

/// Inverse of convert_to_csv. Axes are rebuilt from the distinct coordinate
/// values in first-appearance order; units are unknown so kinds come from the
/// column names only.
GridDataset parse_csv(std::string_view text);

/// Shortest decimal that round-trips at the precision of `type`.
std::string format_number(double value, NcType type);

/// Values in files arrive in archive units (Kelvin, Pa); these bring them to
/// the store's canonical units (degC, hPa, mm).
double to_canonical_units(VariableKind kind, std::string_view units, double value);
std::string canonical_units(VariableKind kind, std::string_view units);

}  // namespace wxrec::nc
