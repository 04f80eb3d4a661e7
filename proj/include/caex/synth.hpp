#pragma once

#include <cstdint>
#include <string>

#include "caex/raster.hpp"

namespace caex {

struct SyntheticScene {
  Raster raster;
  LabelGrid reference;
};

// Two-texture scene: per-band Gaussian samples around mean_a / mean_b,
// clamped to [0,1]. Layouts: "halves" (vertical split) or "disk"
// (centred disk of class 1 on a class-0 background).
SyntheticScene synth_two_texture(int width, int height, int bands, double mean_a, double mean_b,
                                 double sigma, std::uint64_t seed,
                                 const std::string& layout = "halves");

// Binary shape masks.
Mask synth_rect_mask(int width, int height, int r0, int c0, int r1, int c1);
Mask synth_disk_mask(int width, int height, int centre_row, int centre_col, int radius);
// Horizontal 1-px segment on `row`, columns [c0, c1].
Mask synth_line_mask(int width, int height, int row, int c0, int c1);

// Single-band raster with `lo` on dead cells and `hi` on live ones.
Raster raster_from_mask(const Mask& mask, double lo = 0.0, double hi = 1.0);

// Object pixels with at least one non-object 4-neighbour (off-grid
// neighbours do not count). The reference boundary for edge detection.
Mask morphological_boundary(const Mask& object);

}  // namespace caex
