#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "caex/cnn.hpp"
#include "caex/errors.hpp"
#include "caex/rng.hpp"
#include "caex/synth.hpp"

using namespace caex;

namespace {

// Independent scalar oracle: integrate a single uncoupled cell with a much
// finer step than the implementation uses.
double scalar_cell_oracle(double a_center, double drive, double x0, double t_end) {
  double x = x0;
  const double h = 0.0005;
  for (double t = 0.0; t < t_end; t += h) x += h * (-x + a_center * output_fn(x) + drive);
  return x;
}

std::size_t mask_mismatch(const Mask& a, const Mask& b) {
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.cells.size(); ++i) diff += a.cells[i] != b.cells[i] ? 1 : 0;
  return diff;
}

}  // namespace

TEST_CASE("output_fn clamps to [-1,1]") {
  CHECK(output_fn(0.0) == 0.0);
  CHECK(output_fn(2.0) == 1.0);
  CHECK(output_fn(0.5) == 0.5);
  CHECK(output_fn(-3.25) == -1.0);

  Rng rng(3);
  double prev_x = -10.0, prev_y = output_fn(prev_x);
  for (int i = 0; i < 200; ++i) {
    const double x = -10.0 + 20.0 * rng.uniform01();
    const double y = output_fn(x);
    CHECK(y >= -1.0);
    CHECK(y <= 1.0);
    CHECK(output_fn(-x) == -y);  // odd
    if (x >= prev_x) CHECK(y >= prev_y);  // monotone on a sorted pair
    prev_x = x;
    prev_y = y;
  }
}

TEST_CASE("integrate: pure decay reaches zero") {
  CnnTemplate t;
  t.feedback.assign(9, 0.0);
  t.control.assign(9, 0.0);
  t.bias = 0.0;

  RealGrid x0(4, 3);
  Rng rng(1);
  for (auto& v : x0.cells) v = 2.0 * rng.uniform01() - 1.0;

  const CnnState s = integrate(t, RealGrid(4, 3, 0.0), x0);
  for (double v : s.state.cells) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("integrate: bias-only template settles at X = Z") {
  CnnTemplate t;
  t.feedback.assign(9, 0.0);
  t.control.assign(9, 0.0);
  t.bias = 0.37;
  const CnnState s = integrate(t, RealGrid(3, 3, 0.0), RealGrid(3, 3, 0.0));
  for (double v : s.state.cells) CHECK(v == doctest::Approx(0.37).epsilon(1e-5));
}

TEST_CASE("integrate: bistable single cell converges to +1 output") {
  CnnTemplate t;
  t.feedback.assign(9, 0.0);
  t.feedback[4] = 2.0;
  t.control.assign(9, 0.0);
  t.bias = 0.0;

  RealGrid x0(1, 1);
  x0.cells[0] = 0.1;
  const CnnState s = integrate(t, RealGrid(1, 1, 0.0), x0);

  const double oracle = scalar_cell_oracle(2.0, 0.0, 0.1, 50.0);
  CHECK(output_fn(oracle) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(output_fn(s.state.cells[0]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.state.cells[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("integrate: divergence raises InstabilityError naming the template") {
  CnnTemplate t;
  t.feedback.assign(9, 0.0);
  t.control.assign(9, 0.0);
  t.bias = 3e6;
  try {
    integrate(t, RealGrid(2, 2, 0.0), RealGrid(2, 2, 0.0));
    FAIL("expected InstabilityError");
  } catch (const InstabilityError& e) {
    const std::string what = e.what();
    CHECK(what.find("diverged") != std::string::npos);
    CHECK(what.find("Z=") != std::string::npos);  // names the template
  }
}

TEST_CASE("integrate: halving the step changes the steady state by < 10*tol") {
  CnnTemplate t = edge_template();
  Rng rng(9);
  RealGrid u(8, 8);
  for (auto& v : u.cells) v = rng.uniform01() > 0.5 ? 1.0 : -1.0;

  CnnIntegrateOptions coarse;  // h = 0.1
  CnnIntegrateOptions fine;
  fine.step = 0.05;
  const CnnState a = integrate(t, u, RealGrid(8, 8, 0.0), coarse);
  const CnnState b = integrate(t, u, RealGrid(8, 8, 0.0), fine);
  for (std::size_t i = 0; i < a.state.cells.size(); ++i)
    CHECK(std::abs(a.state.cells[i] - b.state.cells[i]) < 10 * coarse.tol);
}

TEST_CASE("integrate: fixed point residual for contracting template") {
  CnnTemplate t;
  t.feedback.assign(9, 0.0);
  t.feedback[4] = 0.5;  // |a_center| < 1: unique fixed point
  t.control.assign(9, 0.0);
  t.bias = 0.2;
  const CnnState s = integrate(t, RealGrid(5, 5, 0.0), RealGrid(5, 5, 0.0));
  // residual |dX/dt| at the final state must sit below tol
  for (double x : s.state.cells)
    CHECK(std::abs(-x + 0.5 * output_fn(x) + 0.2) < 1e-6);
}

TEST_CASE("detect_edges: constant images give an empty mask") {
  for (double level : {0.0, 0.3, 1.0}) {
    Raster r;
    r.width = 9;
    r.height = 7;
    r.bands = 1;
    r.samples.assign(63, level);
    const Mask mask = detect_edges(r, edge_template());
    CHECK(mask.live_count() == 0);
  }
}

TEST_CASE("detect_edges: square outline matches the morphological oracle") {
  const Mask object = synth_rect_mask(8, 8, 2, 2, 5, 5);  // centered 4x4 square
  const Mask expected = morphological_boundary(object);
  CHECK(expected.live_count() == 12);

  const Mask mask = detect_edges(raster_from_mask(object), edge_template());
  CHECK(mask_mismatch(mask, expected) == 0);
}

TEST_CASE("detect_edges: single bright pixel is marked") {
  Mask object(7, 7);
  object.at(3, 3) = 1;
  const Mask mask = detect_edges(raster_from_mask(object), edge_template());
  CHECK(mask.at(3, 3) == 1);
  CHECK(mask.live_count() == 1);
}

TEST_CASE("detect_edges: disk boundary within 2% of the oracle") {
  const Mask object = synth_disk_mask(36, 36, 18, 18, 10);
  const Mask expected = morphological_boundary(object);
  const Mask mask = detect_edges(raster_from_mask(object), edge_template());
  const double frac = static_cast<double>(mask_mismatch(mask, expected)) /
                      static_cast<double>(mask.cells.size());
  CHECK(frac <= 0.02);
}

TEST_CASE("detect_edges rejects multiband rasters") {
  Raster r;
  r.width = 2;
  r.height = 2;
  r.bands = 2;
  r.samples.assign(8, 0.0);
  CHECK_THROWS_AS(detect_edges(r, edge_template()), ParameterError);
}

TEST_CASE("detect_edges propagates instability from the integrator") {
  Raster r;
  r.width = 3;
  r.height = 3;
  r.bands = 1;
  r.samples.assign(9, 0.5);
  CnnTemplate t = edge_template();
  t.bias = 3e6;
  CHECK_THROWS_AS(detect_edges(r, t), InstabilityError);
}

TEST_CASE("template file parsing") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "caex_cnn_tests";
  fs::create_directories(dir);
  const fs::path p = dir / "edge.tmpl";
  {
    std::ofstream out(p);
    out << "radius 1\n"
        << "A 0 0 0 0 2 0 0 0 0\n"
        << "B -1 -1 -1 -1 8 -1 -1 -1 -1\n"
        << "Z -1\n";
  }
  const CnnTemplate t = load_cnn_template(p);
  CHECK(t.radius == 1);
  CHECK(t.feedback[4] == 2.0);
  CHECK(t.control[4] == 8.0);
  CHECK(t.bias == -1.0);

  const fs::path bad = dir / "bad.tmpl";
  {
    std::ofstream out(bad);
    out << "radius 1\nA 0 0 0\n";
  }
  CHECK_THROWS_AS(load_cnn_template(bad), FormatError);
}
