#include <charconv>
#include <cmath>
#include <map>

#include "wxrec/calendar.hpp"
#include "wxrec/error.hpp"
#include "wxrec/ncgrid.hpp"

namespace wxrec::nc {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(Errc::malformed_csv,
                "line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

// Maps coordinate values to axis positions in first-appearance order.
class AxisBuilder {
 public:
  std::size_t index_of(double v) {
    auto [it, inserted] = pos_.try_emplace(v, values_.size());
    if (inserted) values_.push_back(v);
    return it->second;
  }
  const std::vector<double>& values() const { return values_; }

 private:
  std::map<double, std::size_t> pos_;
  std::vector<double> values_;
};

}  // namespace

std::string format_number(double value, NcType type) {
  char buf[64];
  std::to_chars_result r{};
  switch (type) {
    case NcType::float_:
      r = std::to_chars(buf, buf + sizeof buf, static_cast<float>(value));
      break;
    case NcType::double_:
      r = std::to_chars(buf, buf + sizeof buf, value);
      break;
    default:
      r = std::to_chars(buf, buf + sizeof buf, static_cast<long long>(value));
      break;
  }
  return std::string(buf, r.ptr);
}

std::string convert_to_csv(const GridDataset& ds, std::span<const std::string> variables) {
  std::vector<std::string> names(variables.begin(), variables.end());
  if (names.empty()) {
    for (const auto& [name, field] : ds.fields) names.push_back(name);
  }
  std::vector<const Field*> fields;
  fields.reserve(names.size());
  for (const auto& n : names) fields.push_back(&read_variable(ds, n));

  std::string out = "time,lat,lon";
  for (const auto& n : names) {
    out += ',';
    out += n;
  }
  out += '\n';

  std::vector<std::string> lat_text, lon_text;
  for (double v : ds.lats) lat_text.push_back(format_number(v, ds.lat_type));
  for (double v : ds.lons) lon_text.push_back(format_number(v, ds.lon_type));

  for (std::size_t t = 0; t < ds.times.size(); ++t) {
    const std::string time_text = format_number(ds.times[t], ds.time_type);
    for (std::size_t i = 0; i < ds.lats.size(); ++i) {
      for (std::size_t j = 0; j < ds.lons.size(); ++j) {
        out += time_text;
        out += ',';
        out += lat_text[i];
        out += ',';
        out += lon_text[j];
        const std::size_t k = ds.index(t, i, j);
        for (const Field* f : fields) {
          out += ',';
          if (!f->masked(k)) out += format_number(f->values[k], f->source_type);
        }
        out += '\n';
      }
    }
  }
  return out;
}

namespace {

// Numeric days since 1970-01-01, or a calendar date.
double parse_time(std::string_view s, std::size_t line_no) {
  try {
    return parse_double(s, line_no);
  } catch (const Error&) {
    try {
      return static_cast<double>(parse_date(s).days);
    } catch (const Error&) {
      throw Error(Errc::malformed_csv,
                  "line " + std::to_string(line_no) + ": bad time '" + std::string(s) + "'");
    }
  }
}

}  // namespace

GridDataset parse_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(Errc::empty_input, "empty CSV");

  const auto header = split(lines.front(), ',');
  if (header.size() < 3 || header[0] != "time" || header[1] != "lat" || header[2] != "lon") {
    throw Error(Errc::malformed_csv, "CSV header must start with time,lat,lon");
  }
  if (lines.size() == 1) throw Error(Errc::empty_input, "CSV has no data rows");
  const std::size_t nvars = header.size() - 3;

  struct Row {
    std::size_t t, i, j;
    std::vector<std::string_view> cells;
  };
  AxisBuilder times, lats, lons;
  std::vector<Row> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    auto cells = split(lines[n], ',');
    if (cells.size() != header.size()) {
      throw Error(Errc::malformed_csv, "line " + std::to_string(n + 1) + ": wrong column count");
    }
    Row r;
    r.t = times.index_of(parse_time(cells[0], n + 1));
    r.i = lats.index_of(parse_double(cells[1], n + 1));
    r.j = lons.index_of(parse_double(cells[2], n + 1));
    r.cells.assign(cells.begin() + 3, cells.end());
    rows.push_back(std::move(r));
  }

  GridDataset ds;
  ds.times = times.values();
  ds.lats = lats.values();
  ds.lons = lons.values();
  auto monotonic = [](const std::vector<double>& a, bool strictly_up) {
    if (a.size() < 2) return true;
    const bool up = a[1] > a[0];
    if (strictly_up && !up) return false;
    for (std::size_t k = 1; k < a.size(); ++k) {
      if (up ? !(a[k] > a[k - 1]) : !(a[k] < a[k - 1])) return false;
    }
    return true;
  };
  if (!monotonic(ds.times, true) || !monotonic(ds.lats, false) || !monotonic(ds.lons, false)) {
    throw Error(Errc::invalid_coordinates, "CSV coordinates are not monotonic");
  }
  for (double v : ds.lats) {
    if (v < -90.0 || v > 90.0) throw Error(Errc::invalid_coordinates, "latitude out of range");
  }
  for (double v : ds.lons) {
    if (v < -180.0 || v >= 360.0) throw Error(Errc::invalid_coordinates, "longitude out of range");
  }

  const std::size_t total = ds.value_count();
  std::vector<Field*> fields;
  for (std::size_t v = 0; v < nvars; ++v) {
    const std::string name(header[3 + v]);
    if (name.empty()) throw Error(Errc::malformed_csv, "empty column name");
    Field f;
    f.kind = classify_variable(name, "");
    f.source_type = NcType::double_;
    f.values.assign(total, 0.0);
    f.mask.assign(total, 1);
    auto [it, inserted] = ds.fields.emplace(name, std::move(f));
    if (!inserted) throw Error(Errc::malformed_csv, "duplicate column '" + name + "'");
    fields.push_back(&it->second);
  }

  std::vector<std::uint8_t> seen(total, 0);
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const Row& r = rows[n];
    const std::size_t k = ds.index(r.t, r.i, r.j);
    if (seen[k]) throw Error(Errc::malformed_csv, "duplicate grid point on line " + std::to_string(n + 2));
    seen[k] = 1;
    for (std::size_t v = 0; v < nvars; ++v) {
      if (r.cells[v].empty()) continue;
      fields[v]->values[k] = parse_double(r.cells[v], n + 2);
      fields[v]->mask[k] = 0;
    }
  }
  return ds;
}

}  // namespace wxrec::nc
