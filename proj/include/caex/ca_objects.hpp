#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

enum class RegionState : std::uint8_t { U = 0, B = 1, R = 2 };

// Per-pixel region-growing states: B boundary, U unassigned, R region.
struct RegionGrid {
  int width = 0;
  int height = 0;
  std::vector<RegionState> states;  // row-major

  RegionGrid() = default;
  RegionGrid(int w, int h)
      : width(w), height(h), states(static_cast<std::size_t>(w) * h, RegionState::U) {}

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  RegionState at(int row, int col) const { return states[index(row, col)]; }
  RegionState& at(int row, int col) { return states[index(row, col)]; }

  bool operator==(const RegionGrid&) const = default;
};

struct GrowResult {
  RegionGrid grid;
  int sweeps = 0;  // total synchronous sweeps, including the final idle one
};

struct PixelRC {
  int row = 0;
  int col = 0;
  auto operator<=>(const PixelRC&) const = default;
};

struct BBox {
  int min_row = 0, min_col = 0, max_row = 0, max_col = 0;
};

struct ExtractedObject {
  int id = 0;
  std::vector<PixelRC> pixels;           // scan order
  std::vector<PixelRC> boundary_pixels;  // cells with a 4-neighbour outside the object
  std::size_t area_px = 0;
  BBox bbox;
};

enum class Connectivity { four = 4, eight = 8 };

// Seeds B from the mask and grows regions with the synchronous CA rule:
// a U cell becomes R when at least one 4-neighbour is B or R, until a sweep
// changes nothing. R cells 4-connected (through R) to the image border are
// the flooded background and are reverted to U, so surviving R cells are the
// enclosed interiors. The composite is idempotent.
GrowResult grow_regions(const Mask& boundary);

// 4-connected (default) components of the B-or-R cells, id order given by
// the smallest (row,col) cell of each component.
std::vector<ExtractedObject> extract_objects(const RegionGrid& grid,
                                             Connectivity conn = Connectivity::four);

// JSON array of object records: id, area_px, area_ground, bbox, row-wise
// run-length encoding of the pixels.
std::string objects_to_json(const std::vector<ExtractedObject>& objects, double pixel_size);

// PGM round-trip helpers for region grids (U,B,R as gray 0/127/255).
LabelGrid region_grid_to_labels(const RegionGrid& grid);
RegionGrid region_grid_from_labels(const LabelGrid& grid);
void save_region_grid(const std::filesystem::path& path, const RegionGrid& grid);
RegionGrid load_region_grid(const std::filesystem::path& path);

}  // namespace caex
