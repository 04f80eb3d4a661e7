#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace caex {

// Multiband grid of real-valued samples, band-major storage.
// Integer image formats are scaled to [0,1] on load; MBR rasters keep
// their stored float values.
struct Raster {
  int width = 0;
  int height = 0;
  int bands = 1;
  double pixel_size = 1.0;  // ground meters per pixel
  std::vector<double> samples;  // width*height*bands, band-major

  std::size_t index(int band, int row, int col) const {
    return (static_cast<std::size_t>(band) * height + row) * width + col;
  }
  double at(int band, int row, int col) const { return samples[index(band, row, col)]; }
  double& at(int band, int row, int col) { return samples[index(band, row, col)]; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  // Checks the structural invariants; throws ParameterError on violation.
  void validate() const;
};

// Per-pixel class ids in 0..k-1.
struct LabelGrid {
  int width = 0;
  int height = 0;
  int k = 1;  // number of classes
  std::vector<int> labels;  // width*height, row-major

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  int at(int row, int col) const { return labels[index(row, col)]; }
  int& at(int row, int col) { return labels[index(row, col)]; }
  std::size_t size() const { return labels.size(); }
};

// Binary grid: boundary masks and CA configurations.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;  // 0/1, row-major

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  std::uint8_t at(int row, int col) const { return cells[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return cells[index(row, col)]; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < height && col >= 0 && col < width;
  }
  std::size_t live_count() const;

  bool operator==(const Mask&) const = default;
};

// Real-valued single-band grid (CNN states and inputs).
struct RealGrid {
  int width = 0;
  int height = 0;
  std::vector<double> cells;  // row-major

  RealGrid() = default;
  RealGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }
  double at(int row, int col) const { return cells[index(row, col)]; }
  double& at(int row, int col) { return cells[index(row, col)]; }
};

// Per-pixel spectral vector (band values) and spatial vector (windowed
// mean and population std per band). Pixel-major storage.
struct FeatureGrid {
  int width = 0;
  int height = 0;
  int bands = 0;
  std::vector<double> spectral;  // n * bands
  std::vector<double> spatial;   // n * 2*bands

  std::span<const double> spectral_at(std::size_t pixel) const {
    return {spectral.data() + pixel * bands, static_cast<std::size_t>(bands)};
  }
  std::span<const double> spatial_at(std::size_t pixel) const {
    return {spatial.data() + pixel * 2 * bands, static_cast<std::size_t>(2 * bands)};
  }
  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Loads PGM (P5), PPM (P6) or MBR multiband rasters by sniffing the magic.
// Integer samples are divided by maxval; MBR floats pass through unscaled.
Raster load_raster(const std::filesystem::path& path);

// Writes the MBR multiband format: ASCII header "MBR <w> <h> <bands>\n"
// followed by little-endian float32 samples, band-major.
void save_raster_mbr(const std::filesystem::path& path, const Raster& raster);

// Writes a label grid as binary PGM, label i mapped to floor(255*i/(k-1));
// k == 1 maps everything to 0.
void save_mask(const std::filesystem::path& path, const LabelGrid& grid);

// Reads a PGM/PPM back into labels: the distinct sample values found are
// sorted ascending and renumbered 0..k-1 (first band only).
LabelGrid load_label_grid(const std::filesystem::path& path);

// Reads a single-band image as a binary mask (sample > 0.5 -> 1).
Mask load_binary_mask(const std::filesystem::path& path);

// Writes a binary mask as a two-class PGM (0/255).
void save_binary_mask(const std::filesystem::path& path, const Mask& mask);

// Per-pixel spectral and spatial features over clamped (replicated-edge)
// w x w windows. w must be odd and >= 1.
FeatureGrid window_features(const Raster& raster, int window);

LabelGrid to_label_grid(const Mask& mask);
Mask to_mask(const LabelGrid& grid);

}  // namespace caex
