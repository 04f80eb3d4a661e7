#include "caex/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "caex/errors.hpp"

namespace caex {

void Raster::validate() const {
  if (width < 1 || height < 1 || bands < 1)
    throw ParameterError("raster dimensions must be positive");
  if (samples.size() != static_cast<std::size_t>(width) * height * bands)
    throw ParameterError("raster sample count does not match dimensions");
  for (double v : samples)
    if (!std::isfinite(v)) throw ParameterError("raster contains non-finite samples");
}

std::size_t Mask::live_count() const {
  std::size_t n = 0;
  for (auto c : cells) n += c;
  return n;
}

namespace {

// Skips whitespace and '#' comment lines in a PNM header.
void skip_pnm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

long read_pnm_int(std::istream& in, const char* what) {
  skip_pnm_space(in);
  long v = -1;
  if (!(in >> v) || v < 0) throw FormatError(std::string("bad PNM field: ") + what);
  return v;
}

Raster load_pnm(std::ifstream& in, int bands) {
  long w = read_pnm_int(in, "width");
  long h = read_pnm_int(in, "height");
  long maxval = read_pnm_int(in, "maxval");
  if (w < 1 || h < 1) throw FormatError("PNM dimensions must be positive");
  if (maxval < 1 || maxval > 65535) throw FormatError("PNM maxval out of range");
  in.get();  // single whitespace byte before payload

  const int bytes_per = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(w) * h * bands;
  std::vector<unsigned char> raw(count * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw LengthError("PNM payload truncated");

  Raster r;
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  r.bands = bands;
  r.samples.resize(count);
  // PNM payload is pixel-interleaved; storage is band-major.
  for (long row = 0; row < h; ++row) {
    for (long col = 0; col < w; ++col) {
      for (int b = 0; b < bands; ++b) {
        std::size_t src = (static_cast<std::size_t>(row) * w + col) * bands + b;
        unsigned v;
        if (bytes_per == 2)
          v = (static_cast<unsigned>(raw[2 * src]) << 8) | raw[2 * src + 1];
        else
          v = raw[src];
        r.samples[r.index(b, static_cast<int>(row), static_cast<int>(col))] =
            static_cast<double>(v) / static_cast<double>(maxval);
      }
    }
  }
  return r;
}

Raster load_mbr(std::ifstream& in) {
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  long w = 0, h = 0, b = 0;
  if (!(hs >> magic >> w >> h >> b) || magic != "MBR" || w < 1 || h < 1 || b < 1)
    throw FormatError("bad MBR header");

  const std::size_t count = static_cast<std::size_t>(w) * h * b;
  std::vector<unsigned char> raw(count * 4);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw LengthError("MBR payload truncated");

  Raster r;
  r.width = static_cast<int>(w);
  r.height = static_cast<int>(h);
  r.bands = static_cast<int>(b);
  r.samples.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * i]) |
                         (static_cast<std::uint32_t>(raw[4 * i + 1]) << 8) |
                         (static_cast<std::uint32_t>(raw[4 * i + 2]) << 16) |
                         (static_cast<std::uint32_t>(raw[4 * i + 3]) << 24);
    float f;
    std::memcpy(&f, &bits, 4);
    if (!std::isfinite(f)) throw FormatError("MBR contains non-finite samples");
    r.samples[i] = static_cast<double>(f);
  }
  return r;
}

}  // namespace

Raster load_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (!in) throw FormatError("file too short for a magic number: " + path.string());
  if (m0 == 'P' && m1 == '5') return load_pnm(in, 1);
  if (m0 == 'P' && m1 == '6') return load_pnm(in, 3);
  if (m0 == 'M' && m1 == 'B') {
    char m2 = 0;
    in.get(m2);
    if (m2 == 'R') {
      in.seekg(0);
      return load_mbr(in);
    }
  }
  throw FormatError("unrecognized raster format: " + path.string());
}

void save_raster_mbr(const std::filesystem::path& path, const Raster& raster) {
  raster.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "MBR " << raster.width << " " << raster.height << " " << raster.bands << "\n";
  std::vector<unsigned char> raw(raster.samples.size() * 4);
  for (std::size_t i = 0; i < raster.samples.size(); ++i) {
    float f = static_cast<float>(raster.samples[i]);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    raw[4 * i] = static_cast<unsigned char>(bits & 0xff);
    raw[4 * i + 1] = static_cast<unsigned char>((bits >> 8) & 0xff);
    raw[4 * i + 2] = static_cast<unsigned char>((bits >> 16) & 0xff);
    raw[4 * i + 3] = static_cast<unsigned char>((bits >> 24) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

void save_mask(const std::filesystem::path& path, const LabelGrid& grid) {
  if (grid.k < 1 || grid.k > 256) throw ParameterError("save_mask supports 1..256 classes");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << grid.width << " " << grid.height << "\n255\n";
  std::vector<unsigned char> raw(grid.labels.size());
  for (std::size_t i = 0; i < grid.labels.size(); ++i) {
    const int label = grid.labels[i];
    if (label < 0 || label >= grid.k) throw ParameterError("label outside 0..k-1");
    raw[i] = grid.k == 1 ? 0
                         : static_cast<unsigned char>((255 * label) / (grid.k - 1));
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

LabelGrid load_label_grid(const std::filesystem::path& path) {
  Raster r = load_raster(path);
  std::map<double, int> remap;
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col) remap.emplace(r.at(0, row, col), 0);
  int next = 0;
  for (auto& [value, id] : remap) id = next++;

  LabelGrid g;
  g.width = r.width;
  g.height = r.height;
  g.k = next;
  g.labels.resize(r.pixel_count());
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col)
      g.at(row, col) = remap.at(r.at(0, row, col));
  return g;
}

Mask load_binary_mask(const std::filesystem::path& path) {
  Raster r = load_raster(path);
  Mask m(r.width, r.height);
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col)
      m.at(row, col) = r.at(0, row, col) > 0.5 ? 1 : 0;
  return m;
}

void save_binary_mask(const std::filesystem::path& path, const Mask& mask) {
  save_mask(path, to_label_grid(mask));
}

LabelGrid to_label_grid(const Mask& mask) {
  LabelGrid g;
  g.width = mask.width;
  g.height = mask.height;
  g.k = 2;
  g.labels.assign(mask.cells.begin(), mask.cells.end());
  return g;
}

Mask to_mask(const LabelGrid& grid) {
  Mask m(grid.width, grid.height);
  for (std::size_t i = 0; i < grid.labels.size(); ++i) m.cells[i] = grid.labels[i] > 0 ? 1 : 0;
  return m;
}

FeatureGrid window_features(const Raster& raster, int window) {
  if (window < 1 || window % 2 == 0)
    throw ParameterError("window size must be odd and positive");
  raster.validate();

  const int w = raster.width, h = raster.height, bands = raster.bands;
  const int half = window / 2;
  const double inv_area = 1.0 / (static_cast<double>(window) * window);

  FeatureGrid fg;
  fg.width = w;
  fg.height = h;
  fg.bands = bands;
  fg.spectral.resize(raster.pixel_count() * bands);
  fg.spatial.resize(raster.pixel_count() * 2 * bands);

#pragma omp parallel for schedule(static)
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const std::size_t pixel = static_cast<std::size_t>(row) * w + col;
      for (int b = 0; b < bands; ++b) {
        fg.spectral[pixel * bands + b] = raster.at(b, row, col);
        double sum = 0.0, sumsq = 0.0;
        for (int dr = -half; dr <= half; ++dr) {
          const int rr = std::clamp(row + dr, 0, h - 1);
          for (int dc = -half; dc <= half; ++dc) {
            const int cc = std::clamp(col + dc, 0, w - 1);
            const double v = raster.at(b, rr, cc);
            sum += v;
            sumsq += v * v;
          }
        }
        const double mean = sum * inv_area;
        const double var = std::max(0.0, sumsq * inv_area - mean * mean);
        fg.spatial[pixel * 2 * bands + 2 * b] = mean;
        fg.spatial[pixel * 2 * bands + 2 * b + 1] = std::sqrt(var);
      }
    }
  }
  return fg;
}

}  // namespace caex
