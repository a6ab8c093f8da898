#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wxrec::render {

using Rgb = std::array<std::uint8_t, 3>;

struct PaletteStop {
  double anchor = 0.0;
  Rgb color{};
};

struct Palette {
  std::string name;
  std::vector<PaletteStop> stops;  // anchors strictly increasing, 0 first, 1 last
  Rgb missing_color{160, 160, 160};

  /// Throws Error(invalid_argument) when the anchor invariant is broken.
  void validate() const;
};

/// Blue -> white -> red.
const Palette& thermal_palette();
/// White -> dark blue.
const Palette& rain_palette();
/// Ten distinct colours for categorical data (cluster ids).
const Palette& categorical_palette();

/// Looks up a built-in palette by name. Throws Error(invalid_argument).
const Palette& palette_by_name(std::string_view name);

/// Clamps (value - lo) / (hi - lo) to [0, 1] and interpolates between the
/// surrounding anchors, rounding each channel half-up. Non-finite values get
/// the missing colour. Throws Error(degenerate_range) when lo >= hi.
Rgb color_of(double value, double lo, double hi, const Palette& palette);

/// Colour for a category id; ids wrap modulo the palette size.
Rgb category_color(int id, const Palette& palette = categorical_palette());

struct RasterImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB

  Rgb at(std::size_t x, std::size_t y) const {
    const std::size_t k = 3 * (y * width + x);
    return {pixels[k], pixels[k + 1], pixels[k + 2]};
  }
};

/// Values laid out lat-major to match the grid axes.
struct FieldView {
  std::span<const double> lats;
  std::span<const double> lons;
  std::span<const double> values;
  std::span<const std::uint8_t> mask;  // empty = nothing masked
};

/// Each cell becomes a scale x scale block; north is at the top whatever
/// the latitude axis order. Throws Error(empty_field).
RasterImage render_field(const FieldView& field, double lo, double hi, const Palette& palette,
                         std::size_t scale);

/// Same layout as render_field but colours cells by integer category (-1 =
/// missing).
RasterImage render_categories(std::span<const double> lats, std::size_t lon_count,
                              std::span<const int> categories, std::size_t scale,
                              const Palette& palette = categorical_palette());

/// Min and max over unmasked finite values; falls back to [v-0.5, v+0.5]
/// for a constant field so the range is never degenerate.
std::pair<double, double> auto_range(const FieldView& field);

/// Binary PPM: "P6\n<w> <h>\n255\n" followed by raw RGB bytes.
std::string encode_ppm(const RasterImage& image);

/// Parses P6 files with maxval 255. Throws Error(malformed_image).
RasterImage decode_ppm(std::string_view bytes);

struct Sidecar {
  std::string variable;
  std::string date;
  double lo = 0.0;
  double hi = 1.0;
  std::string palette;
  std::size_t grid_lats = 0;
  std::size_t grid_lons = 0;
};

/// {variable, date, lo, hi, palette, grid_shape: [lats, lons]}
std::string sidecar_json(const Sidecar& s);

}  // namespace wxrec::render
