#include "caex/ca_objects.hpp"

#include <algorithm>
#include <sstream>

#include "caex/errors.hpp"

namespace caex {

namespace {

constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

// 4-connected flood over R cells starting at border R cells; marks background.
void revert_background(RegionGrid& g) {
  const int w = g.width, h = g.height;
  std::vector<std::uint8_t> seen(g.states.size(), 0);
  std::vector<PixelRC> stack;
  auto push = [&](int row, int col) {
    const std::size_t i = g.index(row, col);
    if (!seen[i] && g.states[i] == RegionState::R) {
      seen[i] = 1;
      stack.push_back({row, col});
    }
  };
  for (int col = 0; col < w; ++col) {
    push(0, col);
    push(h - 1, col);
  }
  for (int row = 0; row < h; ++row) {
    push(row, 0);
    push(row, w - 1);
  }
  while (!stack.empty()) {
    const PixelRC p = stack.back();
    stack.pop_back();
    g.at(p.row, p.col) = RegionState::U;
    for (int d = 0; d < 4; ++d) {
      const int rr = p.row + kDr[d], cc = p.col + kDc[d];
      if (rr >= 0 && rr < h && cc >= 0 && cc < w) push(rr, cc);
    }
  }
}

}  // namespace

GrowResult grow_regions(const Mask& boundary) {
  if (boundary.width < 1 || boundary.height < 1)
    throw ParameterError("boundary mask must be at least 1x1");
  const int w = boundary.width, h = boundary.height;

  RegionGrid cur(w, h);
  for (std::size_t i = 0; i < boundary.cells.size(); ++i)
    cur.states[i] = boundary.cells[i] ? RegionState::B : RegionState::U;

  RegionGrid next = cur;
  int sweeps = 0;
  for (;;) {
    int changed = 0;
    ++sweeps;
#pragma omp parallel for schedule(static) reduction(max : changed)
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        RegionState s = cur.at(row, col);
        if (s == RegionState::U) {
          for (int d = 0; d < 4; ++d) {
            const int rr = row + kDr[d], cc = col + kDc[d];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const RegionState n = cur.at(rr, cc);
            if (n == RegionState::B || n == RegionState::R) {
              s = RegionState::R;
              changed = 1;
              break;
            }
          }
        }
        next.at(row, col) = s;
      }
    }
    std::swap(cur, next);
    if (!changed) break;
  }

  revert_background(cur);
  return {std::move(cur), sweeps};
}

std::vector<ExtractedObject> extract_objects(const RegionGrid& grid, Connectivity conn) {
  const int w = grid.width, h = grid.height;
  const int ndirs = conn == Connectivity::eight ? 8 : 4;
  static constexpr int dr8[8] = {-1, 1, 0, 0, -1, -1, 1, 1};
  static constexpr int dc8[8] = {0, 0, -1, 1, -1, 1, -1, 1};

  auto occupied = [&](int row, int col) {
    return grid.at(row, col) != RegionState::U;
  };

  std::vector<int> comp(grid.states.size(), -1);
  std::vector<ExtractedObject> objects;
  std::vector<PixelRC> stack;

  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      if (!occupied(row, col) || comp[grid.index(row, col)] >= 0) continue;
      const int id = static_cast<int>(objects.size());
      ExtractedObject obj;
      obj.id = id;
      stack.push_back({row, col});
      comp[grid.index(row, col)] = id;
      while (!stack.empty()) {
        const PixelRC p = stack.back();
        stack.pop_back();
        obj.pixels.push_back(p);
        for (int d = 0; d < ndirs; ++d) {
          const int rr = p.row + dr8[d], cc = p.col + dc8[d];
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const std::size_t i = grid.index(rr, cc);
          if (occupied(rr, cc) && comp[i] < 0) {
            comp[i] = id;
            stack.push_back({rr, cc});
          }
        }
      }
      std::sort(obj.pixels.begin(), obj.pixels.end());
      obj.area_px = obj.pixels.size();
      obj.bbox = {obj.pixels.front().row, obj.pixels.front().col, obj.pixels.front().row,
                  obj.pixels.front().col};
      for (const PixelRC& p : obj.pixels) {
        obj.bbox.min_row = std::min(obj.bbox.min_row, p.row);
        obj.bbox.max_row = std::max(obj.bbox.max_row, p.row);
        obj.bbox.min_col = std::min(obj.bbox.min_col, p.col);
        obj.bbox.max_col = std::max(obj.bbox.max_col, p.col);
      }
      for (const PixelRC& p : obj.pixels) {
        bool edge = false;
        for (int d = 0; d < 4 && !edge; ++d) {
          const int rr = p.row + kDr[d], cc = p.col + kDc[d];
          edge = rr < 0 || rr >= h || cc < 0 || cc >= w || comp[grid.index(rr, cc)] != id;
        }
        if (edge) obj.boundary_pixels.push_back(p);
      }
      objects.push_back(std::move(obj));
    }
  }
  return objects;
}

std::string objects_to_json(const std::vector<ExtractedObject>& objects, double pixel_size) {
  std::ostringstream os;
  os << "[";
  for (std::size_t k = 0; k < objects.size(); ++k) {
    const ExtractedObject& o = objects[k];
    if (k) os << ",";
    os << "{\"id\":" << o.id << ",\"area_px\":" << o.area_px
       << ",\"area_ground\":" << static_cast<double>(o.area_px) * pixel_size * pixel_size
       << ",\"bbox\":[" << o.bbox.min_row << "," << o.bbox.min_col << "," << o.bbox.max_row
       << "," << o.bbox.max_col << "],\"rle\":[";
    bool first = true;
    std::size_t i = 0;
    while (i < o.pixels.size()) {
      std::size_t j = i;
      while (j + 1 < o.pixels.size() && o.pixels[j + 1].row == o.pixels[i].row &&
             o.pixels[j + 1].col == o.pixels[j].col + 1)
        ++j;
      if (!first) os << ",";
      first = false;
      os << "[" << o.pixels[i].row << "," << o.pixels[i].col << "," << (j - i + 1) << "]";
      i = j + 1;
    }
    os << "]}";
  }
  os << "]";
  return os.str();
}

LabelGrid region_grid_to_labels(const RegionGrid& grid) {
  LabelGrid g;
  g.width = grid.width;
  g.height = grid.height;
  g.k = 3;  // U=0 -> 0, B=1 -> 127, R=2 -> 255
  g.labels.resize(grid.states.size());
  for (std::size_t i = 0; i < grid.states.size(); ++i)
    g.labels[i] = static_cast<int>(grid.states[i]);
  return g;
}

RegionGrid region_grid_from_labels(const LabelGrid& grid) {
  if (grid.k > 3) throw ParameterError("region grids encode at most 3 states");
  RegionGrid g(grid.width, grid.height);
  for (std::size_t i = 0; i < grid.labels.size(); ++i)
    g.states[i] = static_cast<RegionState>(grid.labels[i]);
  return g;
}

void save_region_grid(const std::filesystem::path& path, const RegionGrid& grid) {
  save_mask(path, region_grid_to_labels(grid));
}

RegionGrid load_region_grid(const std::filesystem::path& path) {
  // Decode by gray value, not by renumbered label, so grids missing one of
  // the three states still round-trip.
  const Raster r = load_raster(path);
  if (r.bands != 1) throw FormatError("region grid PGM must be single-band");
  RegionGrid g(r.width, r.height);
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col) {
      const double v = r.at(0, row, col);
      if (v < 0.25)
        g.at(row, col) = RegionState::U;
      else if (v < 0.75)
        g.at(row, col) = RegionState::B;
      else
        g.at(row, col) = RegionState::R;
    }
  return g;
}

}  // namespace caex
