#include "caex/serial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "caex/errors.hpp"

namespace caex::serial {

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

CnnState integrate(const CnnTemplate& tmpl, const RealGrid& input, const RealGrid& x0,
                   const CnnIntegrateOptions& opts) {
  tmpl.validate();
  if (input.width != x0.width || input.height != x0.height)
    throw ParameterError("input and initial state dimensions differ");
  if (opts.step <= 0.0 || opts.tol <= 0.0)
    throw ParameterError("integration step and tolerance must be positive");

  const int w = input.width, h = input.height, r = tmpl.radius, side = tmpl.side();
  RealGrid drive(w, h);
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      double acc = tmpl.bias;
      for (int dr = -r; dr <= r; ++dr) {
        const int rr = row + dr;
        if (rr < 0 || rr >= h) continue;
        for (int dc = -r; dc <= r; ++dc) {
          const int cc = col + dc;
          if (cc < 0 || cc >= w) continue;
          acc += tmpl.control[(dr + r) * side + (dc + r)] * input.at(rr, cc);
        }
      }
      drive.at(row, col) = acc;
    }
  }

  RealGrid x = x0;
  RealGrid xn(w, h);
  RealGrid y(w, h);
  double t = 0.0;
  while (t < opts.t_max) {
    for (int row = 0; row < h; ++row)
      for (int col = 0; col < w; ++col) y.at(row, col) = output_fn(x.at(row, col));

    double max_rate = 0.0, max_abs = 0.0;
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        double acc = drive.at(row, col) - x.at(row, col);
        for (int dr = -r; dr <= r; ++dr) {
          const int rr = row + dr;
          if (rr < 0 || rr >= h) continue;
          for (int dc = -r; dc <= r; ++dc) {
            const int cc = col + dc;
            if (cc < 0 || cc >= w) continue;
            acc += tmpl.feedback[(dr + r) * side + (dc + r)] * y.at(rr, cc);
          }
        }
        const double next = x.at(row, col) + opts.step * acc;
        xn.at(row, col) = next;
        max_rate = std::max(max_rate, std::abs(acc));
        max_abs = std::max(max_abs, std::abs(next));
      }
    }
    std::swap(x, xn);
    t += opts.step;
    if (max_abs > opts.blowup)
      throw InstabilityError("CNN integration diverged (serial reference)");
    if (max_rate < opts.tol) break;
  }

  CnnState out;
  out.state = std::move(x);
  out.input = input;
  out.t = t;
  return out;
}

GramMatrix build_gram(const MixtureEnsemble& ensemble, const FeatureRows& rows) {
  const int n = static_cast<int>(rows.size());
  GramMatrix g;
  g.n = n;
  g.entries.resize(static_cast<std::size_t>(n) * n);

  std::vector<std::vector<double>> resp(n);
  for (int i = 0; i < n; ++i) {
    resp[i] = ensemble.responsibility_vector(rows[i]);
    double norm = 0.0;
    for (double v : resp[i]) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : resp[i]) v /= norm;
  }

  for (int i = 0; i < n; ++i) {
    g.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < resp[i].size(); ++t) dot += resp[i][t] * resp[j][t];
      g.at(i, j) = dot;
      g.at(j, i) = dot;
    }
  }
  return g;
}

GrowResult grow_regions(const Mask& boundary) {
  if (boundary.width < 1 || boundary.height < 1)
    throw ParameterError("boundary mask must be at least 1x1");
  const int w = boundary.width, h = boundary.height;
  static constexpr int dr[4] = {-1, 1, 0, 0};
  static constexpr int dc[4] = {0, 0, -1, 1};

  RegionGrid cur(w, h);
  for (std::size_t i = 0; i < boundary.cells.size(); ++i)
    cur.states[i] = boundary.cells[i] ? RegionState::B : RegionState::U;

  RegionGrid next = cur;
  int sweeps = 0;
  for (;;) {
    bool changed = false;
    ++sweeps;
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        RegionState s = cur.at(row, col);
        if (s == RegionState::U) {
          for (int d = 0; d < 4; ++d) {
            const int rr = row + dr[d], cc = col + dc[d];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            const RegionState nb = cur.at(rr, cc);
            if (nb == RegionState::B || nb == RegionState::R) {
              s = RegionState::R;
              changed = true;
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

  // Same border-connected background revert as the parallel kernel.
  std::vector<std::uint8_t> seen(cur.states.size(), 0);
  std::vector<PixelRC> stack;
  auto push = [&](int row, int col) {
    const std::size_t i = cur.index(row, col);
    if (!seen[i] && cur.states[i] == RegionState::R) {
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
    cur.at(p.row, p.col) = RegionState::U;
    for (int d = 0; d < 4; ++d) {
      const int rr = p.row + dr[d], cc = p.col + dc[d];
      if (rr >= 0 && rr < h && cc >= 0 && cc < w) push(rr, cc);
    }
  }
  return {std::move(cur), sweeps};
}

Mask apply_rule(const RuleGene& rule, const Mask& config, int steps) {
  if (steps < 0) throw ParameterError("steps must be >= 0");
  const int w = config.width, h = config.height;
  Mask cur = config;
  Mask next(w, h);
  for (int step = 0; step < steps; ++step) {
    for (int row = 0; row < h; ++row) {
      for (int col = 0; col < w; ++col) {
        int live = 0;
        for (int dr = -1; dr <= 1; ++dr) {
          const int rr = row + dr;
          if (rr < 0 || rr >= h) continue;
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const int cc = col + dc;
            if (cc < 0 || cc >= w) continue;
            live += cur.at(rr, cc);
          }
        }
        next.at(row, col) = rule.next(cur.at(row, col), live);
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

}  // namespace caex::serial
