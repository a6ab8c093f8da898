#include "wxrec/render.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "wxrec/error.hpp"

namespace wxrec::render {
namespace {

std::uint8_t channel(double a, double b, double f) {
  const double x = a + f * (b - a);
  return static_cast<std::uint8_t>(std::clamp(std::floor(x + 0.5), 0.0, 255.0));
}

// Rows are emitted north first.
std::vector<std::size_t> row_order(std::span<const double> lats) {
  std::vector<std::size_t> order(lats.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (lats.size() >= 2 && lats.front() < lats.back()) std::reverse(order.begin(), order.end());
  return order;
}

template <class ColorAt>
RasterImage paint(std::span<const double> lats, std::size_t lon_count, std::size_t scale,
                  ColorAt color_at) {
  if (lats.empty() || lon_count == 0) throw Error(Errc::empty_field, "field has no cells");
  if (scale < 1) throw Error(Errc::invalid_argument, "scale must be at least 1");
  RasterImage img;
  img.width = lon_count * scale;
  img.height = lats.size() * scale;
  img.pixels.resize(img.width * img.height * 3);
  const auto order = row_order(lats);
  for (std::size_t r = 0; r < order.size(); ++r) {
    for (std::size_t j = 0; j < lon_count; ++j) {
      const Rgb c = color_at(order[r] * lon_count + j);
      for (std::size_t dy = 0; dy < scale; ++dy) {
        std::uint8_t* p = &img.pixels[3 * ((r * scale + dy) * img.width + j * scale)];
        for (std::size_t dx = 0; dx < scale; ++dx, p += 3) {
          p[0] = c[0];
          p[1] = c[1];
          p[2] = c[2];
        }
      }
    }
  }
  return img;
}

}  // namespace

void Palette::validate() const {
  if (stops.size() < 2 || stops.front().anchor != 0.0 || stops.back().anchor != 1.0) {
    throw Error(Errc::invalid_argument, "palette anchors must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < stops.size(); ++i) {
    if (!(stops[i].anchor > stops[i - 1].anchor)) {
      throw Error(Errc::invalid_argument, "palette anchors must be strictly increasing");
    }
  }
}

const Palette& thermal_palette() {
  static const Palette p{"thermal",
                         {{0.0, {49, 54, 149}}, {0.5, {255, 255, 255}}, {1.0, {165, 0, 38}}},
                         {160, 160, 160}};
  return p;
}

const Palette& rain_palette() {
  static const Palette p{"rain", {{0.0, {255, 255, 255}}, {1.0, {8, 48, 107}}}, {160, 160, 160}};
  return p;
}

const Palette& categorical_palette() {
  // Tableau 10.
  static const Palette p{"categorical",
                         {{0.0 / 9, {31, 119, 180}},
                          {1.0 / 9, {255, 127, 14}},
                          {2.0 / 9, {44, 160, 44}},
                          {3.0 / 9, {214, 39, 40}},
                          {4.0 / 9, {148, 103, 189}},
                          {5.0 / 9, {140, 86, 75}},
                          {6.0 / 9, {227, 119, 194}},
                          {7.0 / 9, {127, 127, 127}},
                          {8.0 / 9, {188, 189, 34}},
                          {9.0 / 9, {23, 190, 207}}},
                         {0, 0, 0}};
  return p;
}

const Palette& palette_by_name(std::string_view name) {
  for (const Palette* p : {&thermal_palette(), &rain_palette(), &categorical_palette()}) {
    if (p->name == name) return *p;
  }
  throw Error(Errc::invalid_argument, "unknown palette '" + std::string(name) + "'");
}

Rgb color_of(double value, double lo, double hi, const Palette& palette) {
  if (!(lo < hi)) throw Error(Errc::degenerate_range, "color range needs lo < hi");
  if (!std::isfinite(value)) return palette.missing_color;
  const double t = std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
  const auto& s = palette.stops;
  std::size_t i = 0;
  while (i + 2 < s.size() && t > s[i + 1].anchor) ++i;
  const double f = std::clamp((t - s[i].anchor) / (s[i + 1].anchor - s[i].anchor), 0.0, 1.0);
  return {channel(s[i].color[0], s[i + 1].color[0], f),
          channel(s[i].color[1], s[i + 1].color[1], f),
          channel(s[i].color[2], s[i + 1].color[2], f)};
}

Rgb category_color(int id, const Palette& palette) {
  if (id < 0) return palette.missing_color;
  return palette.stops[static_cast<std::size_t>(id) % palette.stops.size()].color;
}

RasterImage render_field(const FieldView& field, double lo, double hi, const Palette& palette,
                         std::size_t scale) {
  if (field.values.empty()) throw Error(Errc::empty_field, "field has no cells");
  if (field.values.size() != field.lats.size() * field.lons.size() ||
      (!field.mask.empty() && field.mask.size() != field.values.size())) {
    throw Error(Errc::dimension_mismatch, "field size does not match its axes");
  }
  if (!(lo < hi)) throw Error(Errc::degenerate_range, "color range needs lo < hi");
  return paint(field.lats, field.lons.size(), scale, [&](std::size_t k) {
    if (!field.mask.empty() && field.mask[k] != 0) return palette.missing_color;
    return color_of(field.values[k], lo, hi, palette);
  });
}

RasterImage render_categories(std::span<const double> lats, std::size_t lon_count,
                              std::span<const int> categories, std::size_t scale,
                              const Palette& palette) {
  if (categories.size() != lats.size() * lon_count) {
    throw Error(Errc::dimension_mismatch, "category grid does not match its axes");
  }
  return paint(lats, lon_count, scale,
               [&](std::size_t k) { return category_color(categories[k], palette); });
}

std::pair<double, double> auto_range(const FieldView& field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t k = 0; k < field.values.size(); ++k) {
    if (!field.mask.empty() && field.mask[k] != 0) continue;
    const double v = field.values[k];
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo <= hi)) throw Error(Errc::empty_field, "field has no unmasked values");
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  return {lo, hi};
}

std::string encode_ppm(const RasterImage& image) {
  std::string out = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

RasterImage decode_ppm(std::string_view bytes) {
  std::size_t pos = 0;
  auto token = [&]() -> std::string_view {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\n' || c == '\r' || c == '\t') {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  auto number = [&]() {
    const auto t = token();
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
      throw Error(Errc::malformed_image, "bad PPM header");
    }
    return v;
  };
  if (token() != "P6") throw Error(Errc::malformed_image, "not a binary PPM");
  RasterImage img;
  img.width = number();
  img.height = number();
  if (number() != 255) throw Error(Errc::malformed_image, "only maxval 255 is supported");
  if (pos >= bytes.size()) throw Error(Errc::malformed_image, "missing pixel data");
  ++pos;  // single whitespace before the raster
  const std::size_t n = img.width * img.height * 3;
  if (img.width != 0 && n / img.width / 3 != img.height) {
    throw Error(Errc::malformed_image, "image too large");
  }
  if (bytes.size() - pos != n) throw Error(Errc::malformed_image, "pixel data size mismatch");
  img.pixels.assign(reinterpret_cast<const std::uint8_t*>(bytes.data() + pos),
                    reinterpret_cast<const std::uint8_t*>(bytes.data() + pos + n));
  return img;
}

std::string sidecar_json(const Sidecar& s) {
  nlohmann::json j{{"variable", s.variable},
                   {"date", s.date},
                   {"lo", s.lo},
                   {"hi", s.hi},
                   {"palette", s.palette},
                   {"grid_shape", {s.grid_lats, s.grid_lons}}};
  return j.dump();
}

}  // namespace wxrec::render
