#include "caex/synth.hpp"

#include <algorithm>
#include <cmath>

#include "caex/errors.hpp"
#include "caex/rng.hpp"

namespace caex {

SyntheticScene synth_two_texture(int width, int height, int bands, double mean_a, double mean_b,
                                 double sigma, std::uint64_t seed, const std::string& layout) {
  if (width < 1 || height < 1 || bands < 1) throw ParameterError("scene dimensions must be positive");
  if (sigma < 0.0) throw ParameterError("noise sigma must be >= 0");

  SyntheticScene scene;
  scene.reference.width = width;
  scene.reference.height = height;
  scene.reference.k = 2;
  scene.reference.labels.assign(static_cast<std::size_t>(width) * height, 0);

  if (layout == "halves") {
    for (int row = 0; row < height; ++row)
      for (int col = 0; col < width; ++col)
        scene.reference.at(row, col) = col >= width / 2 ? 1 : 0;
  } else if (layout == "disk") {
    const int cy = height / 2, cx = width / 2;
    const int radius = std::min(width, height) / 3;
    for (int row = 0; row < height; ++row)
      for (int col = 0; col < width; ++col) {
        const int dr = row - cy, dc = col - cx;
        scene.reference.at(row, col) = dr * dr + dc * dc <= radius * radius ? 1 : 0;
      }
  } else {
    throw ParameterError("unknown scene layout: " + layout);
  }

  scene.raster.width = width;
  scene.raster.height = height;
  scene.raster.bands = bands;
  scene.raster.samples.resize(static_cast<std::size_t>(width) * height * bands);
  Rng rng(seed);
  for (int b = 0; b < bands; ++b)
    for (int row = 0; row < height; ++row)
      for (int col = 0; col < width; ++col) {
        const double mean = scene.reference.at(row, col) == 0 ? mean_a : mean_b;
        scene.raster.at(b, row, col) = std::clamp(mean + sigma * rng.normal(), 0.0, 1.0);
      }
  return scene;
}

Mask synth_rect_mask(int width, int height, int r0, int c0, int r1, int c1) {
  Mask m(width, height);
  for (int row = std::max(0, r0); row <= std::min(height - 1, r1); ++row)
    for (int col = std::max(0, c0); col <= std::min(width - 1, c1); ++col) m.at(row, col) = 1;
  return m;
}

Mask synth_disk_mask(int width, int height, int centre_row, int centre_col, int radius) {
  Mask m(width, height);
  for (int row = 0; row < height; ++row)
    for (int col = 0; col < width; ++col) {
      const int dr = row - centre_row, dc = col - centre_col;
      if (dr * dr + dc * dc <= radius * radius) m.at(row, col) = 1;
    }
  return m;
}

Mask synth_line_mask(int width, int height, int row, int c0, int c1) {
  Mask m(width, height);
  for (int col = std::max(0, c0); col <= std::min(width - 1, c1); ++col) m.at(row, col) = 1;
  return m;
}

Raster raster_from_mask(const Mask& mask, double lo, double hi) {
  Raster r;
  r.width = mask.width;
  r.height = mask.height;
  r.bands = 1;
  r.samples.resize(mask.cells.size());
  for (std::size_t i = 0; i < mask.cells.size(); ++i) r.samples[i] = mask.cells[i] ? hi : lo;
  return r;
}

Mask morphological_boundary(const Mask& object) {
  Mask out(object.width, object.height);
  static constexpr int dr[4] = {-1, 1, 0, 0};
  static constexpr int dc[4] = {0, 0, -1, 1};
  for (int row = 0; row < object.height; ++row)
    for (int col = 0; col < object.width; ++col) {
      if (!object.at(row, col)) continue;
      for (int d = 0; d < 4; ++d) {
        const int rr = row + dr[d], cc = col + dc[d];
        if (object.in_bounds(rr, cc) && !object.at(rr, cc)) {
          out.at(row, col) = 1;
          break;
        }
      }
    }
  return out;
}

}  // namespace caex
