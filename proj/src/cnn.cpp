#include "caex/cnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "caex/errors.hpp"

namespace caex {

// (|x+1| - |x-1|)/2 is the clamp of x to [-1,1]; the clamp form keeps the
// range exact in floating point.
double output_fn(double x) { return std::clamp(x, -1.0, 1.0); }

void CnnTemplate::validate() const {
  if (radius < 0) throw ParameterError("template radius must be >= 0");
  const std::size_t n = static_cast<std::size_t>(side()) * side();
  if (feedback.size() != n || control.size() != n)
    throw ParameterError("template A/B size must be (2r+1)^2");
  for (double v : feedback)
    if (!std::isfinite(v)) throw ParameterError("template A has non-finite weights");
  for (double v : control)
    if (!std::isfinite(v)) throw ParameterError("template B has non-finite weights");
  if (!std::isfinite(bias)) throw ParameterError("template Z must be finite");
}

CnnTemplate edge_template() {
  CnnTemplate t;
  t.radius = 1;
  t.feedback = {0, 0, 0, 0, 2, 0, 0, 0, 0};
  t.control = {-1, -1, -1, -1, 8, -1, -1, -1, -1};
  t.bias = -1.0;
  return t;
}

CnnTemplate load_cnn_template(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CnnTemplate t;
  t.radius = -1;
  bool have_a = false, have_b = false, have_z = false;
  std::string key;
  while (in >> key) {
    if (key == "radius") {
      if (!(in >> t.radius)) throw FormatError("template: bad radius");
    } else if (key == "A" || key == "B") {
      if (t.radius < 0) throw FormatError("template: radius must come before A/B");
      const std::size_t n = static_cast<std::size_t>(2 * t.radius + 1) * (2 * t.radius + 1);
      std::vector<double> vals(n);
      for (auto& v : vals)
        if (!(in >> v)) throw FormatError("template: truncated " + key);
      (key == "A" ? t.feedback : t.control) = std::move(vals);
      (key == "A" ? have_a : have_b) = true;
    } else if (key == "Z") {
      if (!(in >> t.bias)) throw FormatError("template: bad Z");
      have_z = true;
    } else {
      throw FormatError("template: unknown key " + key);
    }
  }
  if (t.radius < 0 || !have_a || !have_b || !have_z)
    throw FormatError("template: missing radius/A/B/Z");
  t.validate();
  return t;
}

namespace {

std::string describe(const CnnTemplate& t) {
  std::ostringstream os;
  os << "radius=" << t.radius << " a_center=" << t.feedback[t.feedback.size() / 2]
     << " b_center=" << t.control[t.control.size() / 2] << " Z=" << t.bias;
  return os.str();
}

}  // namespace

CnnState integrate(const CnnTemplate& tmpl, const RealGrid& input, const RealGrid& x0,
                   const CnnIntegrateOptions& opts) {
  tmpl.validate();
  if (input.width != x0.width || input.height != x0.height)
    throw ParameterError("input and initial state dimensions differ");
  if (opts.step <= 0.0 || opts.tol <= 0.0)
    throw ParameterError("integration step and tolerance must be positive");

  const int w = input.width, h = input.height, r = tmpl.radius, side = tmpl.side();
  const double hstep = opts.step;

  // B*U + Z is constant; fold it once.
  RealGrid drive(w, h);
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
    for (int row = 0; row < h; ++row)
      for (int col = 0; col < w; ++col) y.at(row, col) = output_fn(x.at(row, col));

    double max_rate = 0.0;
    double max_abs = 0.0;
#pragma omp parallel for schedule(static) reduction(max : max_rate, max_abs)
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
        const double next = x.at(row, col) + hstep * acc;
        xn.at(row, col) = next;
        max_rate = std::max(max_rate, std::abs(acc));
        max_abs = std::max(max_abs, std::abs(next));
      }
    }
    std::swap(x, xn);
    t += hstep;
    if (max_abs > opts.blowup)
      throw InstabilityError("CNN integration diverged (template " + describe(tmpl) + ")");
    if (max_rate < opts.tol) break;
  }

  CnnState out;
  out.state = std::move(x);
  out.input = input;
  out.t = t;
  return out;
}

Mask detect_edges(const Raster& raster, const CnnTemplate& tmpl, double threshold) {
  if (raster.bands != 1) throw ParameterError("detect_edges expects a single-band raster");
  tmpl.validate();

  const int w = raster.width, h = raster.height, r = tmpl.radius;
  const int pw = w + 2 * r, ph = h + 2 * r;

  // Replicate-pad so image-border cells see their own value outside the
  // frame rather than the integrator's zero virtual cells.
  RealGrid u(pw, ph);
  for (int row = 0; row < ph; ++row) {
    const int rr = std::clamp(row - r, 0, h - 1);
    for (int col = 0; col < pw; ++col) {
      const int cc = std::clamp(col - r, 0, w - 1);
      u.at(row, col) = 2.0 * raster.at(0, rr, cc) - 1.0;
    }
  }

  CnnState steady = integrate(tmpl, u, RealGrid(pw, ph, 0.0));

  Mask mask(w, h);
  for (int row = 0; row < h; ++row)
    for (int col = 0; col < w; ++col)
      mask.at(row, col) = output_fn(steady.state.at(row + r, col + r)) > threshold ? 1 : 0;
  return mask;
}

}  // namespace caex
