#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <limits>

#include "caex/errors.hpp"
#include "caex/raster.hpp"
#include "caex/rng.hpp"

using namespace caex;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "caex_raster_tests";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("PGM load scales endpoints to [0,1]") {
  const auto p = temp_file("two_by_two.pgm");
  std::string payload = "P5\n2 2\n255\n";
  payload += '\x00';
  payload += '\xff';
  payload += '\x00';
  payload += '\xff';
  write_bytes(p, payload);

  const Raster r = load_raster(p);
  CHECK(r.width == 2);
  CHECK(r.height == 2);
  CHECK(r.bands == 1);
  CHECK(r.samples == std::vector<double>{0.0, 1.0, 0.0, 1.0});
}

TEST_CASE("PPM load gives three bands") {
  const auto p = temp_file("one_px.ppm");
  std::string payload = "P6\n1 1\n255\n";
  payload += '\xff';
  payload += '\x00';
  payload += '\x00';
  write_bytes(p, payload);

  const Raster r = load_raster(p);
  CHECK(r.bands == 3);
  REQUIRE(r.samples.size() == 3);
  CHECK(r.samples[0] == 1.0);  // band-major: band 0 first
  CHECK(r.samples[1] == 0.0);
  CHECK(r.samples[2] == 0.0);
}

TEST_CASE("16-bit PGM samples are big-endian and scaled by maxval") {
  const auto p = temp_file("wide.pgm");
  std::string payload = "P5\n1 1\n65535\n";
  payload += '\xff';
  payload += '\xff';
  write_bytes(p, payload);
  CHECK(load_raster(p).samples[0] == 1.0);
}

TEST_CASE("MBR round-trips byte-exact through save") {
  const auto p = temp_file("multi.mbr");
  const auto p2 = temp_file("multi_copy.mbr");

  Raster r;
  r.width = 3;
  r.height = 2;
  r.bands = 4;
  Rng rng(7);
  for (int i = 0; i < 24; ++i)
    r.samples.push_back(static_cast<float>(rng.uniform01() * 10 - 5));
  save_raster_mbr(p, r);

  const Raster loaded = load_raster(p);
  CHECK(loaded.width == 3);
  CHECK(loaded.height == 2);
  CHECK(loaded.bands == 4);
  save_raster_mbr(p2, loaded);
  CHECK(read_bytes(p) == read_bytes(p2));
}

TEST_CASE("save_mask gray levels") {
  SUBCASE("two classes map to 0 and 255") {
    LabelGrid g{2, 1, 2, {0, 1}};
    const auto p = temp_file("two_class.pgm");
    save_mask(p, g);
    const std::string bytes = read_bytes(p);
    const std::string tail = bytes.substr(bytes.size() - 2);
    CHECK(static_cast<unsigned char>(tail[0]) == 0);
    CHECK(static_cast<unsigned char>(tail[1]) == 255);
  }
  SUBCASE("single class maps to all zero") {
    LabelGrid g{3, 1, 1, {0, 0, 0}};
    const auto p = temp_file("one_class.pgm");
    save_mask(p, g);
    const std::string bytes = read_bytes(p);
    for (std::size_t i = bytes.size() - 3; i < bytes.size(); ++i)
      CHECK(static_cast<unsigned char>(bytes[i]) == 0);
  }
  SUBCASE("three classes map to 0,127,255") {
    LabelGrid g{3, 1, 3, {0, 1, 2}};
    const auto p = temp_file("three_class.pgm");
    save_mask(p, g);
    const std::string bytes = read_bytes(p);
    const std::string tail = bytes.substr(bytes.size() - 3);
    CHECK(static_cast<unsigned char>(tail[0]) == 0);
    CHECK(static_cast<unsigned char>(tail[1]) == 127);
    CHECK(static_cast<unsigned char>(tail[2]) == 255);
  }
}

TEST_CASE("label round-trip through PGM") {
  LabelGrid g{4, 1, 3, {0, 2, 1, 2}};
  const auto p = temp_file("roundtrip.pgm");
  save_mask(p, g);
  const LabelGrid back = load_label_grid(p);
  CHECK(back.k == 3);
  CHECK(back.labels == g.labels);
}

TEST_CASE("malformed and truncated inputs raise typed errors") {
  const auto bad_header = temp_file("bad_header.pgm");
  write_bytes(bad_header, "P5\n-3 2\n255\naaaa");
  CHECK_THROWS_AS(load_raster(bad_header), FormatError);

  const auto truncated = temp_file("truncated.pgm");
  write_bytes(truncated, "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(load_raster(truncated), LengthError);

  const auto unknown = temp_file("unknown.bin");
  write_bytes(unknown, "XY raster");
  CHECK_THROWS_AS(load_raster(unknown), FormatError);

  const auto mbr_short = temp_file("short.mbr");
  write_bytes(mbr_short, "MBR 2 2 1\nabc");
  CHECK_THROWS_AS(load_raster(mbr_short), LengthError);

  const auto mbr_zero = temp_file("zero_band.mbr");
  write_bytes(mbr_zero, "MBR 2 2 0\n");
  CHECK_THROWS_AS(load_raster(mbr_zero), FormatError);

  const auto too_deep = temp_file("too_deep.pgm");
  write_bytes(too_deep, "P5\n1 1\n70000\naa");
  CHECK_THROWS_AS(load_raster(too_deep), FormatError);
}

TEST_CASE("PGM headers may carry comments") {
  const auto p = temp_file("commented.pgm");
  std::string payload = "P5\n# produced by hand\n2 1\n# maxval next\n255\n";
  payload += '\x40';
  payload += '\x80';
  write_bytes(p, payload);
  const Raster r = load_raster(p);
  CHECK(r.width == 2);
  CHECK(r.samples[0] == doctest::Approx(64.0 / 255.0));
}

TEST_CASE("window features: constant raster has zero std and mean c") {
  Raster r;
  r.width = 5;
  r.height = 4;
  r.bands = 2;
  r.samples.assign(40, 0.0);
  for (std::size_t i = 0; i < 20; ++i) r.samples[i] = 0.25;        // band 0
  for (std::size_t i = 20; i < 40; ++i) r.samples[i] = 0.75;       // band 1

  for (int w : {1, 3, 5}) {
    const FeatureGrid fg = window_features(r, w);
    for (std::size_t p = 0; p < fg.pixel_count(); ++p) {
      const auto s = fg.spatial_at(p);
      CHECK(s[0] == doctest::Approx(0.25));
      CHECK(s[1] == 0.0);
      CHECK(s[2] == doctest::Approx(0.75));
      CHECK(s[3] == 0.0);
    }
  }
}

TEST_CASE("window features: w=1 degenerates to the pixel itself") {
  Raster r;
  r.width = 3;
  r.height = 1;
  r.bands = 1;
  r.samples = {0.1, 0.5, 0.9};
  const FeatureGrid fg = window_features(r, 1);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(fg.spatial_at(p)[0] == r.samples[p]);
    CHECK(fg.spatial_at(p)[1] == 0.0);
    CHECK(fg.spectral_at(p)[0] == r.samples[p]);
  }
}

TEST_CASE("window features: 3x3 image 1..9 center window") {
  Raster r;
  r.width = 3;
  r.height = 3;
  r.bands = 1;
  for (int i = 1; i <= 9; ++i) r.samples.push_back(i);
  const FeatureGrid fg = window_features(r, 3);
  const auto s = fg.spatial_at(4);  // center pixel
  CHECK(s[0] == doctest::Approx(5.0).epsilon(1e-12));
  // population std of {1..9}: sqrt(60/9)
  CHECK(s[1] == doctest::Approx(2.581988897471611).epsilon(1e-12));
}

TEST_CASE("window features: translation equivariance on the interior") {
  Rng rng(11);
  Raster a;
  a.width = 12;
  a.height = 9;
  a.bands = 1;
  for (std::size_t i = 0; i < 108; ++i) a.samples.push_back(rng.uniform01());

  Raster b = a;  // shift right by one column
  for (int row = 0; row < a.height; ++row)
    for (int col = 0; col < a.width; ++col)
      b.at(0, row, col) = a.at(0, row, col == 0 ? 0 : col - 1);

  const int w = 3;
  const FeatureGrid fa = window_features(a, w);
  const FeatureGrid fb = window_features(b, w);
  for (int row = 1; row < a.height - 1; ++row)
    for (int col = 2; col < a.width - 1; ++col) {
      const std::size_t pa = static_cast<std::size_t>(row) * a.width + col - 1;
      const std::size_t pb = static_cast<std::size_t>(row) * a.width + col;
      CHECK(fa.spatial_at(pa)[0] == fb.spatial_at(pb)[0]);
      CHECK(fa.spatial_at(pa)[1] == fb.spatial_at(pb)[1]);
    }
}

TEST_CASE("window features: std is nonnegative on random rasters") {
  Rng rng(5);
  Raster r;
  r.width = 17;
  r.height = 13;
  r.bands = 3;
  for (std::size_t i = 0; i < 17u * 13 * 3; ++i) r.samples.push_back(rng.uniform01());
  const FeatureGrid fg = window_features(r, 5);
  for (std::size_t p = 0; p < fg.pixel_count(); ++p)
    for (int b = 0; b < 3; ++b) CHECK(fg.spatial_at(p)[2 * b + 1] >= 0.0);
}

TEST_CASE("window features: even window is rejected") {
  Raster r;
  r.width = 2;
  r.height = 2;
  r.bands = 1;
  r.samples = {0, 0, 0, 0};
  CHECK_THROWS_AS(window_features(r, 2), ParameterError);
}

TEST_CASE("raster invariants are enforced") {
  Raster r;
  r.width = 2;
  r.height = 1;
  r.bands = 1;
  r.samples = {0.0};  // wrong length
  CHECK_THROWS_AS(r.validate(), ParameterError);
  r.samples = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(r.validate(), ParameterError);
}
