#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caex/raster.hpp"

namespace caex {

struct Point {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const Point&) const = default;
};

using PointSet = std::vector<Point>;

// One fitted line: anchor point, unit direction, and the interval of
// assigned-point projections along the direction.
struct LineSegment {
  Point anchor;
  Point direction;  // unit norm
  double extent_lo = 0.0;
  double extent_hi = 0.0;
};

struct LineApprox {
  int k = 0;
  std::vector<LineSegment> segments;
  std::vector<int> assignment;    // point -> segment
  double cost = 0.0;              // sum of squared distances to the nearest line
  std::vector<double> cost_trace; // winning restart's per-iteration cost, nonincreasing
};

// Convex hull (counter-clockwise, no duplicate endpoint). Collinear inputs
// collapse to their extreme pair.
PointSet convex_hull(PointSet points);

// Minimum directional extent: min over directions of (max proj - min proj),
// via rotating calipers over the hull edges. Exact for d = 2.
double directional_width(const PointSet& points);

// Max pairwise distance, computed on the hull.
double set_diameter(const PointSet& points);

// Snaps points to a grid of cell side eps*diam(P)/4 and keeps the
// lexicographically smallest point of each occupied cell. Q is a subset of P.
PointSet grid_coreset(const PointSet& points, double eps);

// Alternating fit of k lines: assign points to the nearest line, refit each
// line as the principal axis of its cluster, repeat to an assignment
// fixpoint. Best of `restarts` seeded initializations.
LineApprox kline_fit(const PointSet& points, int k, std::uint64_t seed, int restarts = 8);

// CSV "x,y" lines.
PointSet load_points_csv(const std::string& text);
std::string points_to_csv(const PointSet& points);
std::string line_approx_to_json(const LineApprox& approx);

// Live mask cells as points (x = col, y = row).
PointSet mask_points(const Mask& mask);

}  // namespace caex
