#include "caex/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "caex/errors.hpp"
#include "caex/rng.hpp"

namespace caex {

namespace {

double cross(const Point& o, const Point& a, const Point& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double dist2(const Point& a, const Point& b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

PointSet convex_hull(PointSet pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;

  PointSet hull(2 * n);
  std::size_t m = 0;
  for (std::size_t i = 0; i < n; ++i) {  // lower chain
    while (m >= 2 && cross(hull[m - 2], hull[m - 1], pts[i]) <= 0) --m;
    hull[m++] = pts[i];
  }
  const std::size_t lower = m + 1;
  for (std::size_t i = n - 1; i-- > 0;) {  // upper chain
    while (m >= lower && cross(hull[m - 2], hull[m - 1], pts[i]) <= 0) --m;
    hull[m++] = pts[i];
  }
  hull.resize(m - 1);
  if (hull.size() < 2) {  // all collinear: keep the extreme pair
    return {pts.front(), pts.back()};
  }
  return hull;
}

double directional_width(const PointSet& points) {
  if (points.empty()) throw ParameterError("directional_width needs at least one point");
  for (const Point& p : points)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      throw ParameterError("point set contains non-finite coordinates");

  PointSet hull = convex_hull(points);
  const std::size_t h = hull.size();
  if (h <= 2) return 0.0;  // single point or collinear set

  // Width is attained flush with some hull edge; rotate the calipers over
  // the edges and take the farthest (antipodal) vertex of each.
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h; ++i) {
    const Point& a = hull[i];
    const Point& b = hull[(i + 1) % h];
    const double len = std::sqrt(dist2(a, b));
    if (len == 0.0) continue;
    double far = 0.0;
    for (std::size_t v = 0; v < h; ++v) far = std::max(far, std::abs(cross(a, b, hull[v])));
    best = std::min(best, far / len);
  }
  return best;
}

double set_diameter(const PointSet& points) {
  if (points.empty()) throw ParameterError("set_diameter needs at least one point");
  PointSet hull = convex_hull(points);
  double best = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j)
      best = std::max(best, dist2(hull[i], hull[j]));
  return std::sqrt(best);
}

PointSet grid_coreset(const PointSet& points, double eps) {
  if (eps <= 0.0 || eps > 0.49) throw ParameterError("eps must be in (0, 0.49]");
  if (points.empty()) throw ParameterError("grid_coreset needs at least one point");

  const double diam = set_diameter(points);
  if (diam == 0.0) return {points.front()};
  const double cell = eps * diam / 4.0;

  double minx = points.front().x, miny = points.front().y;
  for (const Point& p : points) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
  }

  std::map<std::pair<long long, long long>, Point> cells;
  for (const Point& p : points) {
    const auto key = std::make_pair(static_cast<long long>(std::floor((p.x - minx) / cell)),
                                    static_cast<long long>(std::floor((p.y - miny) / cell)));
    auto [it, inserted] = cells.emplace(key, p);
    if (!inserted && p < it->second) it->second = p;
  }

  PointSet out;
  out.reserve(cells.size());
  for (const auto& [key, p] : cells) out.push_back(p);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Principal axis of a cluster: centroid + dominant eigenvector of the 2x2
// scatter matrix. Degenerate clusters get direction (1,0).
LineSegment fit_line(const PointSet& pts, const std::vector<int>& assign, int id,
                     std::size_t count) {
  LineSegment seg;
  seg.direction = {1.0, 0.0};
  if (count == 0) return seg;

  double cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (assign[i] != id) continue;
    cx += pts[i].x;
    cy += pts[i].y;
  }
  cx /= static_cast<double>(count);
  cy /= static_cast<double>(count);
  seg.anchor = {cx, cy};

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (assign[i] != id) continue;
    const double dx = pts[i].x - cx, dy = pts[i].y - cy;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx + syy > 0.0) {
    // Dominant eigenvector of [[sxx,sxy],[sxy,syy]].
    const double tr = sxx + syy;
    const double det = sxx * syy - sxy * sxy;
    const double lambda = 0.5 * (tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    double vx, vy;
    if (std::abs(sxy) > 1e-300) {
      vx = lambda - syy;
      vy = sxy;
    } else if (sxx >= syy) {
      vx = 1.0;
      vy = 0.0;
    } else {
      vx = 0.0;
      vy = 1.0;
    }
    const double norm = std::hypot(vx, vy);
    if (norm > 0.0) seg.direction = {vx / norm, vy / norm};
  }

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (assign[i] != id) continue;
    const double t = (pts[i].x - cx) * seg.direction.x + (pts[i].y - cy) * seg.direction.y;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  seg.extent_lo = lo;
  seg.extent_hi = hi;
  return seg;
}

double line_dist2(const LineSegment& seg, const Point& p) {
  const double dx = p.x - seg.anchor.x, dy = p.y - seg.anchor.y;
  const double perp = dx * seg.direction.y - dy * seg.direction.x;
  return perp * perp;
}

}  // namespace

LineApprox kline_fit(const PointSet& points, int k, std::uint64_t seed, int restarts) {
  const std::size_t n = points.size();
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw ParameterError("kline_fit requires 1 <= k <= n");
  if (restarts < 1) throw ParameterError("kline_fit requires restarts >= 1");

  LineApprox best;
  best.cost = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt < restarts; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt));
    std::vector<int> assign(n);
    for (std::size_t i = 0; i < n; ++i) assign[i] = static_cast<int>(rng.below(k));
    // Every cluster gets at least one point.
    for (int c = 0; c < k; ++c) assign[c] = c;

    std::vector<LineSegment> lines(k);
    std::vector<std::size_t> counts(k);
    std::vector<double> trace;
    double cost = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
      for (int c = 0; c < k; ++c) lines[c] = fit_line(points, assign, c, counts[c]);

      // Empty clusters reseed from the farthest point.
      for (int c = 0; c < k; ++c) {
        if (counts[c] > 0) continue;
        std::size_t far = 0;
        double fd = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (counts[assign[i]] <= 1) continue;
          const double d = line_dist2(lines[assign[i]], points[i]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        --counts[assign[far]];
        assign[far] = c;
        counts[c] = 1;
        lines[c] = fit_line(points, assign, c, 1);
      }

      bool changed = false;
      cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        int bestc = assign[i];
        double bestd = line_dist2(lines[bestc], points[i]);
        for (int c = 0; c < k; ++c) {
          const double d = line_dist2(lines[c], points[i]);
          if (d < bestd) {
            bestd = d;
            bestc = c;
          }
        }
        if (bestc != assign[i]) {
          assign[i] = bestc;
          changed = true;
        }
        cost += bestd;
      }
      trace.push_back(cost);
      if (!changed) break;
    }

    // Final refit so segments match the converged assignment.
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) ++counts[assign[i]];
    for (int c = 0; c < k; ++c) lines[c] = fit_line(points, assign, c, counts[c]);
    cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) cost += line_dist2(lines[assign[i]], points[i]);
    trace.push_back(cost);

    if (cost < best.cost) {
      best.k = k;
      best.segments = lines;
      best.assignment = assign;
      best.cost = cost;
      best.cost_trace = trace;
    }
  }
  return best;
}

PointSet load_points_csv(const std::string& text) {
  PointSet out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p.x >> p.y)) throw FormatError("bad CSV point line: " + line);
    out.push_back(p);
  }
  return out;
}

std::string points_to_csv(const PointSet& points) {
  std::ostringstream os;
  os.precision(17);
  for (const Point& p : points) os << p.x << "," << p.y << "\n";
  return os.str();
}

std::string line_approx_to_json(const LineApprox& approx) {
  std::ostringstream os;
  os.precision(17);
  os << "{\"k\":" << approx.k << ",\"cost\":" << approx.cost << ",\"segments\":[";
  for (int c = 0; c < approx.k; ++c) {
    const LineSegment& s = approx.segments[c];
    if (c) os << ",";
    os << "{\"anchor\":[" << s.anchor.x << "," << s.anchor.y << "],\"direction\":["
       << s.direction.x << "," << s.direction.y << "],\"extent\":[" << s.extent_lo << ","
       << s.extent_hi << "]}";
  }
  os << "]}";
  return os.str();
}

PointSet mask_points(const Mask& mask) {
  PointSet out;
  for (int row = 0; row < mask.height; ++row)
    for (int col = 0; col < mask.width; ++col)
      if (mask.at(row, col)) out.push_back({static_cast<double>(col), static_cast<double>(row)});
  return out;
}

}  // namespace caex
