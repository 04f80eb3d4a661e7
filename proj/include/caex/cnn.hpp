#pragma once

#include <filesystem>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

// Cellular-neural-network cell template: feedback weights A, control
// weights B (both (2r+1)^2, row-major) and bias Z.
struct CnnTemplate {
  int radius = 1;
  std::vector<double> feedback;  // A
  std::vector<double> control;   // B
  double bias = 0.0;             // Z

  int side() const { return 2 * radius + 1; }
  void validate() const;
};

// Snapshot of the network after integration.
struct CnnState {
  RealGrid state;  // X
  RealGrid input;  // U (fixed during integration)
  double t = 0.0;  // elapsed integration time
};

struct CnnIntegrateOptions {
  double step = 0.1;      // forward-Euler h
  double tol = 1e-6;      // stop when max |dX/dt| < tol
  double t_max = 100.0;
  double blowup = 1e6;    // |X| beyond this raises InstabilityError
};

// Standard cell output: clamp of x to [-1,1], exactly (|x+1| - |x-1|)/2.
double output_fn(double x);

// Classic binary edge template: A center 2, B = 8-neighbour Laplacian, Z = -1.
CnnTemplate edge_template();

// Parses a template file with keys "radius", "A", "B", "Z".
CnnTemplate load_cnn_template(const std::filesystem::path& path);

// Forward-Euler integration of the CNN ODE with fixed input. Boundary cells
// see virtual neighbours with U = Y = 0. Synchronous (double-buffered) update.
CnnState integrate(const CnnTemplate& tmpl, const RealGrid& input, const RealGrid& x0,
                   const CnnIntegrateOptions& opts = {});

// Runs the template on a single-band raster rescaled to [-1,1] (u = 2v-1)
// and marks cells whose steady-state output exceeds the threshold.
// Borders are handled by replicate-padding the input by the template radius.
Mask detect_edges(const Raster& raster, const CnnTemplate& tmpl, double threshold = 0.0);

}  // namespace caex
