#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wxrec/error.hpp"
#include "wxrec/render.hpp"

using namespace wxrec;
using namespace wxrec::render;

namespace {

const Palette kBlackWhite{"bw", {{0.0, {0, 0, 0}}, {1.0, {255, 255, 255}}}, {1, 2, 3}};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::invalid_argument;
}

std::string hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : bytes) {
    out += digits[c >> 4];
    out += digits[c & 15];
  }
  return out;
}

// 4 x 4 grid, ascending latitudes, value i*4 + j + 0.1, cell (1,2) masked,
// thermal palette over [0, 16], scale 1. Expected bytes were worked out with
// exact rational arithmetic outside the library.
const char* kGoldenPixels =
    "d17c90c65c75ba3d5aaf1d3efefcfcf3dce1e7bcc6dc9cab9b9dcbb4b6d9a0a0a0e8e8f33439964d52a4676bb18184be";
constexpr unsigned long long kGoldenFnv = 0xbe2a94a11e0d8dbbull;

std::string golden_ppm() {
  const std::vector<double> lats{0, 1, 2, 3}, lons{0, 1, 2, 3};
  std::vector<double> values;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) values.push_back(i * 4 + j + 0.1);
  std::vector<std::uint8_t> mask(16, 0);
  mask[1 * 4 + 2] = 1;
  return encode_ppm(render_field({lats, lons, values, mask}, 0, 16, thermal_palette(), 1));
}

}  // namespace

TEST_SUITE("render") {
  TEST_CASE("color_of endpoints and midpoint") {
    for (const Palette* p : {&thermal_palette(), &rain_palette(), &categorical_palette()}) {
      CHECK(color_of(-3, -3, 7, *p) == p->stops.front().color);
      CHECK(color_of(7, -3, 7, *p) == p->stops.back().color);
      CHECK(color_of(-100, -3, 7, *p) == p->stops.front().color);
      CHECK(color_of(100, -3, 7, *p) == p->stops.back().color);
    }
    CHECK(color_of(0.5, 0, 1, kBlackWhite) == Rgb{128, 128, 128});
    CHECK(color_of(5, 0, 10, thermal_palette()) == Rgb{255, 255, 255});
    // 0.25 of the way: 49 + 0.5 * 206 = 152, 54 + 0.5 * 201 = 154.5 -> 155, 149 + 0.5 * 106 = 202
    CHECK(color_of(2.5, 0, 10, thermal_palette()) == Rgb{152, 155, 202});
    CHECK(color_of(NAN, 0, 1, kBlackWhite) == Rgb{1, 2, 3});
    CHECK(code_of([&] { color_of(1, 1, 1, kBlackWhite); }) == Errc::degenerate_range);
    CHECK(code_of([&] { color_of(1, 2, 1, kBlackWhite); }) == Errc::degenerate_range);
  }

  TEST_CASE("color_of is monotone on the two-stop palettes") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-5, 15);
    for (int i = 0; i < 2000; ++i) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const Rgb ca = color_of(a, 0, 10, kBlackWhite), cb = color_of(b, 0, 10, kBlackWhite);
      CHECK(ca[0] <= cb[0]);
      const Rgb ra = color_of(a, 0, 10, rain_palette()), rb = color_of(b, 0, 10, rain_palette());
      for (int c = 0; c < 3; ++c) CHECK(ra[c] >= rb[c]);  // white -> dark blue darkens
    }
  }

  TEST_CASE("palettes are well formed") {
    for (const char* name : {"thermal", "rain", "categorical"}) {
      CHECK_NOTHROW(palette_by_name(name).validate());
    }
    CHECK(palette_by_name("categorical").stops.size() == 10);
    CHECK(code_of([] { palette_by_name("plasma"); }) == Errc::invalid_argument);
    const Palette bad{"bad", {{0.0, {0, 0, 0}}, {0.0, {1, 1, 1}}, {1.0, {2, 2, 2}}}, {}};
    CHECK(code_of([&] { bad.validate(); }) == Errc::invalid_argument);
    CHECK(category_color(10) == category_color(0));
    CHECK(category_color(-1) == categorical_palette().missing_color);
  }

  TEST_CASE("field dimensions and orientation") {
    const std::vector<double> lats{10, 20}, lons{0, 1, 2}, v{0, 1, 2, 3, 4, 5};
    const auto img = render_field({lats, lons, v, {}}, 0, 5, kBlackWhite, 4);
    CHECK(img.width == 12);
    CHECK(img.height == 8);
    CHECK(img.pixels.size() == 12 * 8 * 3);
    // northern row (lat 20) on top
    CHECK(img.at(0, 0) == color_of(3, 0, 5, kBlackWhite));
    CHECK(img.at(11, 7) == color_of(2, 0, 5, kBlackWhite));
    const std::vector<double> desc{20, 10}, v2{3, 4, 5, 0, 1, 2};
    CHECK(render_field({desc, lons, v2, {}}, 0, 5, kBlackWhite, 4).pixels == img.pixels);

    const std::vector<double> one{0}, val{7};
    const auto px = render_field({one, one, val, {}}, 0, 10, thermal_palette(), 1);
    CHECK(px.width == 1);
    CHECK(px.at(0, 0) == color_of(7, 0, 10, thermal_palette()));
    const std::vector<double> none;
    CHECK(code_of([&] { render_field({none, none, none, {}}, 0, 1, kBlackWhite, 1); }) ==
          Errc::empty_field);
  }

  TEST_CASE("categories") {
    const std::vector<double> lats{0, 1};
    const std::vector<int> cats{0, 1, -1, 12};
    const auto img = render_categories(lats, 2, cats, 2);
    CHECK(img.width == 4);
    CHECK(img.at(0, 0) == category_color(-1));
    CHECK(img.at(3, 0) == category_color(2));
    CHECK(img.at(2, 3) == category_color(1));
  }

  TEST_CASE("ppm encoding") {
    RasterImage white{1, 1, {255, 255, 255}};
    CHECK(encode_ppm(white) == std::string("P6\n1 1\n255\n\xff\xff\xff"));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      RasterImage img;
      img.width = 1 + rng() % 9;
      img.height = 1 + rng() % 9;
      for (std::size_t k = 0; k < img.width * img.height * 3; ++k) img.pixels.push_back(rng() & 255);
      const auto bytes = encode_ppm(img);
      CHECK(encode_ppm(decode_ppm(bytes)) == bytes);
    }
    CHECK(code_of([] { decode_ppm("P5\n1 1\n255\n\0"); }) == Errc::malformed_image);
    CHECK(code_of([] { decode_ppm("P6\n2 1\n255\n\1\2\3"); }) == Errc::malformed_image);
    CHECK(code_of([] { decode_ppm("P6\n1 1\n65535\n\1\2\3"); }) == Errc::malformed_image);
    CHECK(code_of([] { decode_ppm("P6\n1"); }) == Errc::malformed_image);
  }

  TEST_CASE("golden 4x4 raster") {
    const auto ppm = golden_ppm();
    CHECK(ppm.substr(0, 11) == "P6\n4 4\n255\n");
    CHECK(hex(ppm.substr(11)) == kGoldenPixels);
    CHECK(oracle::fnv1a(ppm) == kGoldenFnv);
    CHECK(golden_ppm() == ppm);
  }

  TEST_CASE("auto range and sidecar") {
    const std::vector<double> lats{0}, lons{0, 1, 2}, v{4, NAN, 9};
    CHECK(auto_range({lats, lons, v, {}}) == std::pair<double, double>{4, 9});
    const std::vector<std::uint8_t> mask{0, 0, 1};
    CHECK(auto_range({lats, lons, v, mask}) == std::pair<double, double>{3.5, 4.5});
    const std::vector<std::uint8_t> all{1, 1, 1};
    CHECK(code_of([&] { auto_range({lats, lons, v, all}); }) == Errc::empty_field);

    Sidecar s{"temp", "2020-01-01", -1.5, 2, "thermal", 3, 4};
    CHECK(sidecar_json(s) ==
          R"({"date":"2020-01-01","grid_shape":[3,4],"hi":2.0,"lo":-1.5,"palette":"thermal","variable":"temp"})");
  }
}
