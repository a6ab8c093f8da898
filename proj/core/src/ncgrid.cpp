#include "wxrec/ncgrid.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>

#include "wxrec/error.hpp"

namespace wxrec::nc {
namespace {

constexpr std::uint32_t kTagDimension = 0x0A;
constexpr std::uint32_t kTagVariable = 0x0B;
constexpr std::uint32_t kTagAttribute = 0x0C;
constexpr std::uint32_t kStreaming = 0xFFFFFFFFu;

std::uint64_t pad4(std::uint64_t n) { return (n + 3) & ~std::uint64_t{3}; }

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Multiplication that saturates instead of wrapping; a saturated size can
// never fit inside a real file, so the bounds checks downstream reject it.
std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) return std::numeric_limits<std::uint64_t>::max();
  return r;
}

std::uint64_t add_sat(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_add_overflow(a, b, &r)) return std::numeric_limits<std::uint64_t>::max();
  return r;
}

template <class T>
T load_be(const std::byte* p) {
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
            std::conditional_t<sizeof(T) == 2, std::uint16_t,
            std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    u = static_cast<U>((u << 8) | static_cast<U>(std::to_integer<std::uint8_t>(p[i])));
  }
  return std::bit_cast<T>(u);
}

double decode_one(const std::byte* p, NcType t) {
  switch (t) {
    case NcType::byte_: return static_cast<double>(load_be<std::int8_t>(p));
    case NcType::char_: return static_cast<double>(load_be<std::uint8_t>(p));
    case NcType::short_: return static_cast<double>(load_be<std::int16_t>(p));
    case NcType::int_: return static_cast<double>(load_be<std::int32_t>(p));
    case NcType::float_: return static_cast<double>(load_be<float>(p));
    case NcType::double_: return load_be<double>(p);
  }
  return 0.0;
}

/// Bounds-checked big-endian cursor over the header.
class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  void need(std::uint64_t n) const {
    if (n > remaining()) throw Error(Errc::truncated_data, "header runs past end of file");
  }

  std::uint32_t u32() {
    need(4);
    auto v = load_be<std::uint32_t>(bytes_.data() + pos_);
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    need(8);
    auto v = load_be<std::uint64_t>(bytes_.data() + pos_);
    pos_ += 8;
    return v;
  }

  const std::byte* take(std::uint64_t n) {
    need(n);
    const std::byte* p = bytes_.data() + pos_;
    pos_ += static_cast<std::size_t>(n);
    return p;
  }

  void padding(std::uint64_t used) {
    std::uint64_t pad = pad4(used) - used;
    const std::byte* p = take(pad);
    for (std::uint64_t i = 0; i < pad; ++i) {
      if (p[i] != std::byte{0}) {
        throw Error(Errc::malformed_header, "non-zero header padding");
      }
    }
  }

  std::string name() {
    std::uint32_t n = u32();
    if (n == 0) throw Error(Errc::malformed_header, "empty name");
    const std::byte* p = take(n);
    std::string s(reinterpret_cast<const char*>(p), n);
    padding(n);
    return s;
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

NcType read_type(Reader& r) {
  std::uint32_t code = r.u32();
  if (code < 1 || code > 6) {
    throw Error(Errc::malformed_header, "unknown type code " + std::to_string(code));
  }
  return static_cast<NcType>(code);
}

// Returns the element count, or 0 for an absent list. Guards the count
// against the bytes actually left so hostile counts cannot drive allocation.
std::uint32_t list_header(Reader& r, std::uint32_t expected_tag, std::uint64_t min_elem_bytes) {
  std::uint32_t tag = r.u32();
  std::uint32_t n = r.u32();
  if (tag == 0) {
    if (n != 0) throw Error(Errc::malformed_header, "absent list with non-zero count");
    return 0;
  }
  if (tag != expected_tag) throw Error(Errc::malformed_header, "unexpected list tag");
  r.need(mul_sat(n, min_elem_bytes));
  return n;
}

std::vector<NcAttribute> read_attributes(Reader& r) {
  std::uint32_t n = list_header(r, kTagAttribute, 16);
  std::vector<NcAttribute> out;
  out.reserve(n);
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < n; ++i) {
    NcAttribute a;
    a.name = r.name();
    if (!seen.insert(a.name).second) {
      throw Error(Errc::malformed_header, "duplicate attribute '" + a.name + "'");
    }
    a.type = read_type(r);
    std::uint32_t count = r.u32();
    const std::uint64_t w = type_width(a.type);
    const std::uint64_t bytes = mul_sat(count, w);
    const std::byte* p = r.take(bytes);
    if (a.type == NcType::char_) {
      a.text.assign(reinterpret_cast<const char*>(p), count);
      // Strip trailing NULs some writers include.
      while (!a.text.empty() && a.text.back() == '\0') a.text.pop_back();
    } else {
      a.numbers.reserve(count);
      for (std::uint32_t k = 0; k < count; ++k) a.numbers.push_back(decode_one(p + k * w, a.type));
    }
    r.padding(bytes);
    out.push_back(std::move(a));
  }
  return out;
}

std::optional<double> scalar_attribute(const NcVariable& v, std::string_view name) {
  const NcAttribute* a = v.attribute(name);
  if (a == nullptr || a->numbers.empty()) return std::nullopt;
  return a->numbers.front();
}

std::string text_attribute(const NcVariable& v, std::string_view name) {
  const NcAttribute* a = v.attribute(name);
  return a != nullptr ? a->text : std::string{};
}

bool equal_fill(double value, double fill, NcType t) {
  if (t == NcType::float_) {
    float a = static_cast<float>(value);
    float b = static_cast<float>(fill);
    return a == b || (std::isnan(a) && std::isnan(b));
  }
  return value == fill || (std::isnan(value) && std::isnan(fill));
}

struct Decoded {
  std::vector<double> values;
  std::vector<std::uint8_t> mask;
};

/// Decodes every element of a variable, records first, in storage order.
Decoded decode_variable(std::span<const std::byte> file, const NcHeader& h, const NcVariable& v) {
  std::uint64_t per_record = 1;
  for (std::size_t d : v.dim_ids) {
    const auto& dim = h.dims[d];
    if (!dim.is_record()) per_record = mul_sat(per_record, dim.length);
  }
  const std::uint64_t records = v.is_record ? h.numrecs : 1;
  const std::size_t w = type_width(v.type);
  const std::uint64_t total = mul_sat(per_record, records);
  // Offsets were already bounds-checked by parse_header.
  Decoded out;
  out.values.resize(static_cast<std::size_t>(total));
  out.mask.assign(static_cast<std::size_t>(total), 0);

  const double fill = scalar_attribute(v, "_FillValue").value_or(default_fill(v.type));
  std::size_t k = 0;
  for (std::uint64_t rec = 0; rec < records; ++rec) {
    const std::byte* base = file.data() + v.begin + rec * h.record_size;
    for (std::uint64_t i = 0; i < per_record; ++i, ++k) {
      double x = decode_one(base + i * w, v.type);
      out.values[k] = x;
      if (equal_fill(x, fill, v.type)) out.mask[k] = 1;
    }
  }
  return out;
}

const NcVariable* find_axis_var(const NcHeader& h, std::initializer_list<std::string_view> names) {
  for (const auto& v : h.vars) {
    for (auto n : names) {
      if (iequals(v.name, n) && v.dim_ids.size() == 1) return &v;
    }
  }
  return nullptr;
}

void check_monotonic(const std::vector<double>& axis, const char* what, double lo, double hi) {
  for (double x : axis) {
    if (!std::isfinite(x) || x < lo || x > hi) {
      throw Error(Errc::invalid_coordinates, std::string(what) + " value out of range");
    }
  }
  if (axis.size() < 2) return;
  const bool up = axis[1] > axis[0];
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (up ? !(axis[i] > axis[i - 1]) : !(axis[i] < axis[i - 1])) {
      throw Error(Errc::invalid_coordinates, std::string(what) + " axis not strictly monotonic");
    }
  }
}

}  // namespace

std::size_t type_width(NcType t) {
  switch (t) {
    case NcType::byte_:
    case NcType::char_: return 1;
    case NcType::short_: return 2;
    case NcType::int_:
    case NcType::float_: return 4;
    case NcType::double_: return 8;
  }
  return 1;
}

double default_fill(NcType t) {
  switch (t) {
    case NcType::byte_: return -127.0;
    case NcType::char_: return 0.0;
    case NcType::short_: return -32767.0;
    case NcType::int_: return -2147483647.0;
    case NcType::float_: return static_cast<double>(9.9692099683868690e+36f);
    case NcType::double_: return 9.9692099683868690e+36;
  }
  return 0.0;
}

const NcAttribute* NcVariable::attribute(std::string_view attr_name) const {
  for (const auto& a : attributes) {
    if (a.name == attr_name) return &a;
  }
  return nullptr;
}

std::optional<std::size_t> NcHeader::find_dim(std::string_view name) const {
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i].name == name) return i;
  }
  return std::nullopt;
}

const NcVariable* NcHeader::find_var(std::string_view name) const {
  for (const auto& v : vars) {
    if (v.name == name) return &v;
  }
  return nullptr;
}

std::string_view to_string(VariableKind kind) {
  switch (kind) {
    case VariableKind::temperature: return "temperature";
    case VariableKind::pressure: return "pressure";
    case VariableKind::rainfall: return "rainfall";
    case VariableKind::other: return "other";
  }
  return "other";
}

std::optional<VariableKind> parse_kind(std::string_view text) {
  for (auto k : {VariableKind::temperature, VariableKind::pressure, VariableKind::rainfall,
                 VariableKind::other}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

VariableKind classify_variable(std::string_view name, std::string_view units,
                               std::string_view standard_name) {
  const std::string n = lower(name);
  const std::string u = lower(units);
  const std::string s = lower(standard_name);

  auto any_of = [](const std::string& hay, std::initializer_list<std::string_view> needles) {
    return std::any_of(needles.begin(), needles.end(),
                       [&](std::string_view x) { return hay.find(x) != std::string::npos; });
  };

  if (any_of(s, {"temperature"})) return VariableKind::temperature;
  if (any_of(s, {"precipitation", "rainfall"})) return VariableKind::rainfall;
  if (any_of(s, {"pressure"})) return VariableKind::pressure;

  if (u == "k" || u == "degk" || u == "kelvin" || u == "degc" || u == "deg_c" ||
      u == "celsius" || u == "degrees_c" || u == "degree_celsius" || u == "c") {
    return VariableKind::temperature;
  }
  if (u == "pa" || u == "hpa" || u == "mbar" || u == "mb") return VariableKind::pressure;
  if (u == "mm" || u == "mm/day" || u == "mm/month" || u == "mm d-1") return VariableKind::rainfall;

  if (any_of(n, {"temp", "tas", "t2m", "sst"})) return VariableKind::temperature;
  if (any_of(n, {"precip", "rain", "prcp"}) || n == "pr" || n == "tp") return VariableKind::rainfall;
  if (any_of(n, {"pres", "psl", "slp", "mslp"}) || n == "ps") return VariableKind::pressure;
  return VariableKind::other;
}

Format detect_format(std::span<const std::byte> prefix) {
  if (prefix.size() < 4) return Format::unsupported;
  if (prefix[0] != std::byte{'C'} || prefix[1] != std::byte{'D'} || prefix[2] != std::byte{'F'}) {
    return Format::unsupported;
  }
  if (prefix[3] == std::byte{1}) return Format::classic_v1;
  if (prefix[3] == std::byte{2}) return Format::classic_v2;
  return Format::unsupported;
}

NcHeader parse_header(std::span<const std::byte> file) {
  NcHeader h;
  h.format = detect_format(file);
  if (h.format == Format::unsupported) {
    throw Error(Errc::unsupported_format, "not a classic-format (CDF-1/CDF-2) file");
  }
  Reader r(file);
  r.take(4);
  const std::uint32_t raw_numrecs = r.u32();
  const bool streaming = raw_numrecs == kStreaming;
  h.numrecs = streaming ? 0 : raw_numrecs;

  // Dimensions.
  const std::uint32_t ndims = list_header(r, kTagDimension, 12);
  h.dims.reserve(ndims);
  std::optional<std::size_t> record_dim;
  std::set<std::string> dim_names;
  for (std::uint32_t i = 0; i < ndims; ++i) {
    NcDimension d;
    d.name = r.name();
    d.length = r.u32();
    if (!dim_names.insert(d.name).second) {
      throw Error(Errc::malformed_header, "duplicate dimension '" + d.name + "'");
    }
    if (d.is_record()) {
      if (record_dim) throw Error(Errc::malformed_header, "more than one record dimension");
      record_dim = i;
    }
    h.dims.push_back(std::move(d));
  }

  h.global_attributes = read_attributes(r);

  // Variables.
  const std::uint32_t nvars = list_header(r, kTagVariable, 36);
  h.vars.reserve(nvars);
  std::set<std::string> var_names;
  for (std::uint32_t i = 0; i < nvars; ++i) {
    NcVariable v;
    v.name = r.name();
    if (!var_names.insert(v.name).second) {
      throw Error(Errc::malformed_header, "duplicate variable '" + v.name + "'");
    }
    const std::uint32_t rank = r.u32();
    r.need(mul_sat(rank, 4));
    v.dim_ids.reserve(rank);
    for (std::uint32_t k = 0; k < rank; ++k) {
      std::uint32_t id = r.u32();
      if (id >= h.dims.size()) throw Error(Errc::malformed_header, "dimension id out of range");
      if (h.dims[id].is_record()) {
        if (k != 0) throw Error(Errc::malformed_header, "record dimension must come first");
        v.is_record = true;
      }
      v.dim_ids.push_back(id);
    }
    v.attributes = read_attributes(r);
    v.type = read_type(r);
    const std::uint32_t declared_vsize = r.u32();
    v.begin = h.format == Format::classic_v2 ? r.u64() : r.u32();

    std::uint64_t product = type_width(v.type);
    for (std::size_t id : v.dim_ids) {
      if (!h.dims[id].is_record()) product = mul_sat(product, h.dims[id].length);
    }
    v.vsize = pad4(product);
    // Writers store 2^32-1 for variables too large for the 32-bit field.
    if (declared_vsize != kStreaming && declared_vsize != v.vsize) {
      throw Error(Errc::malformed_header, "vsize of '" + v.name + "' disagrees with its shape");
    }
    h.vars.push_back(std::move(v));
  }

  // Record layout: a lone record variable is stored without padding.
  std::vector<const NcVariable*> record_vars;
  for (const auto& v : h.vars) {
    if (v.is_record) record_vars.push_back(&v);
  }
  if (record_vars.size() == 1) {
    const NcVariable& v = *record_vars.front();
    std::uint64_t product = type_width(v.type);
    for (std::size_t id : v.dim_ids) {
      if (!h.dims[id].is_record()) product = mul_sat(product, h.dims[id].length);
    }
    h.record_size = product;
  } else {
    for (const auto* v : record_vars) h.record_size = add_sat(h.record_size, v->vsize);
  }

  const std::uint64_t file_size = file.size();
  if (streaming) {
    std::uint64_t first = std::numeric_limits<std::uint64_t>::max();
    for (const auto* v : record_vars) first = std::min(first, v->begin);
    if (!record_vars.empty() && h.record_size > 0 && first <= file_size) {
      h.numrecs = (file_size - first) / h.record_size;
    }
  }

  const std::uint64_t header_end = r.offset();
  for (const auto& v : h.vars) {
    if (v.begin < header_end) {
      throw Error(Errc::malformed_header, "variable '" + v.name + "' begins inside the header");
    }
    std::uint64_t end;
    if (v.is_record) {
      if (h.numrecs == 0) continue;
      const std::uint64_t last = record_vars.size() == 1 ? h.record_size : v.vsize;
      end = add_sat(add_sat(v.begin, mul_sat(h.numrecs - 1, h.record_size)), last);
    } else {
      end = add_sat(v.begin, v.vsize);
    }
    if (end > file_size) {
      throw Error(Errc::truncated_data, "data of '" + v.name + "' extends past end of file");
    }
  }
  return h;
}

GridDataset parse_classic(std::span<const std::byte> file) {
  const NcHeader h = parse_header(file);

  const NcVariable* lat_var = find_axis_var(h, {"lat", "latitude"});
  const NcVariable* lon_var = find_axis_var(h, {"lon", "longitude"});
  if (lat_var == nullptr || lon_var == nullptr) {
    throw Error(Errc::missing_coordinates, "no lat/lon coordinate variables");
  }
  const std::size_t lat_dim = lat_var->dim_ids.front();
  const std::size_t lon_dim = lon_var->dim_ids.front();
  if (lat_dim == lon_dim) throw Error(Errc::invalid_coordinates, "lat and lon share a dimension");

  std::optional<std::size_t> time_dim;
  for (std::size_t i = 0; i < h.dims.size(); ++i) {
    if (h.dims[i].is_record()) time_dim = i;
  }
  if (!time_dim) {
    for (std::size_t i = 0; i < h.dims.size(); ++i) {
      if (iequals(h.dims[i].name, "time")) time_dim = i;
    }
  }
  if (time_dim && (*time_dim == lat_dim || *time_dim == lon_dim)) {
    throw Error(Errc::invalid_coordinates, "time axis coincides with a spatial axis");
  }

  GridDataset ds;
  auto axis_values = [&](const NcVariable& v) {
    Decoded d = decode_variable(file, h, v);
    for (auto m : d.mask) {
      if (m) throw Error(Errc::invalid_coordinates, "fill value in coordinate '" + v.name + "'");
    }
    return d.values;
  };
  ds.lats = axis_values(*lat_var);
  ds.lons = axis_values(*lon_var);
  ds.lat_type = lat_var->type;
  ds.lon_type = lon_var->type;
  check_monotonic(ds.lats, "latitude", -90.0, 90.0);
  check_monotonic(ds.lons, "longitude", -180.0, 360.0);
  for (double x : ds.lons) {
    if (x >= 360.0) throw Error(Errc::invalid_coordinates, "longitude value out of range");
  }

  std::size_t ntimes = 1;
  if (time_dim) {
    const auto& dim = h.dims[*time_dim];
    ntimes = static_cast<std::size_t>(dim.is_record() ? h.numrecs : dim.length);
    const NcVariable* tv = nullptr;
    for (const auto& v : h.vars) {
      if (v.dim_ids.size() == 1 && v.dim_ids.front() == *time_dim && v.name == dim.name) tv = &v;
    }
    if (tv != nullptr) {
      ds.times = axis_values(*tv);
      ds.time_type = tv->type;
      ds.time_units = text_attribute(*tv, "units");
    } else {
      ds.times.resize(ntimes);
      for (std::size_t i = 0; i < ntimes; ++i) ds.times[i] = static_cast<double>(i);
      ds.time_type = NcType::int_;
    }
    for (std::size_t i = 0; i < ds.times.size(); ++i) {
      if (!std::isfinite(ds.times[i]) || (i > 0 && !(ds.times[i] > ds.times[i - 1]))) {
        throw Error(Errc::invalid_coordinates, "time axis not strictly increasing");
      }
    }
  } else {
    ds.times = {0.0};
    ds.time_type = NcType::int_;
  }
  if (auto tu = parse_time_units(ds.time_units)) {
    ds.time_epoch = tu->epoch;
    ds.days_per_time_unit = tu->days_per_unit;
  }

  const std::set<std::string> axis_names = [&] {
    std::set<std::string> s{lat_var->name, lon_var->name};
    if (time_dim) s.insert(h.dims[*time_dim].name);
    return s;
  }();

  for (const auto& v : h.vars) {
    if (axis_names.count(v.name) != 0 || v.type == NcType::char_) continue;
    // Drop singleton non-axis dimensions (e.g. height=2m) before matching.
    std::vector<std::size_t> shape;
    for (std::size_t id : v.dim_ids) {
      const bool axis = id == lat_dim || id == lon_dim || (time_dim && id == *time_dim);
      if (!axis && h.dims[id].length == 1) continue;
      shape.push_back(id);
    }
    std::vector<std::size_t> want;
    if (time_dim) want.push_back(*time_dim);
    want.push_back(lat_dim);
    want.push_back(lon_dim);
    if (shape != want) continue;

    Decoded d = decode_variable(file, h, v);
    Field f;
    f.units = text_attribute(v, "units");
    f.kind = classify_variable(v.name, f.units, text_attribute(v, "standard_name"));
    f.source_type = v.type;
    const auto scale = scalar_attribute(v, "scale_factor");
    const auto offset = scalar_attribute(v, "add_offset");
    if (scale || offset) {
      const NcAttribute* a = v.attribute(scale ? "scale_factor" : "add_offset");
      f.source_type = a->type == NcType::float_ ? NcType::float_ : NcType::double_;
      for (auto& x : d.values) x = x * scale.value_or(1.0) + offset.value_or(0.0);
    }
    f.values = std::move(d.values);
    f.mask = std::move(d.mask);
    ds.fields.emplace(v.name, std::move(f));
  }
  return ds;
}

GridDataset read_classic_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::snapshot_io, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_classic(std::as_bytes(std::span(raw)));
}

const Field& read_variable(const GridDataset& dataset, std::string_view name) {
  auto it = dataset.fields.find(std::string(name));
  if (it == dataset.fields.end()) {
    throw Error(Errc::unknown_variable, "no variable '" + std::string(name) + "'");
  }
  return it->second;
}

double to_canonical_units(VariableKind kind, std::string_view units, double value) {
  const std::string u = lower(units);
  if (kind == VariableKind::temperature && (u == "k" || u == "degk" || u == "kelvin")) {
    return value - 273.15;
  }
  if (kind == VariableKind::pressure && u == "pa") return value / 100.0;
  return value;
}

std::string canonical_units(VariableKind kind, std::string_view units) {
  switch (kind) {
    case VariableKind::temperature: return "degC";
    case VariableKind::pressure: return "hPa";
    case VariableKind::rainfall: return units.empty() ? "mm" : std::string(units);
    case VariableKind::other: return std::string(units);
  }
  return std::string(units);
}

}  // namespace wxrec::nc
