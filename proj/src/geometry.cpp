#include "geordd/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace geordd {
namespace {

Point lerp(const Point& a, const Point& b, double t) {
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

// Closest point to s on segment [a, b], returned as the clamped parameter t.
double closest_param_on_segment(const Point& a, const Point& b, const Point& s) {
  const Point d = b - a;
  const double len2 = squared_norm(d);
  double t = dot(s - a, d) / len2;
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

Border::Border(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 2) {
    throw InputError("border needs at least 2 vertices, got " +
                     std::to_string(vertices_.size()));
  }
  cum_length_.resize(vertices_.size());
  cum_length_[0] = 0.0;
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    if (!std::isfinite(vertices_[i].x) || !std::isfinite(vertices_[i].y) ||
        !std::isfinite(vertices_[i - 1].x) || !std::isfinite(vertices_[i - 1].y)) {
      throw InputError("border vertex " + std::to_string(i) + " is not finite");
    }
    const double seg = distance(vertices_[i - 1], vertices_[i]);
    if (seg <= 0.0) {
      throw InputError("border vertices " + std::to_string(i - 1) + " and " +
                       std::to_string(i) + " coincide");
    }
    cum_length_[i] = cum_length_[i - 1] + seg;
  }
}

Point Border::point_at_arclength(double s) const {
  s = std::clamp(s, 0.0, total_length());
  // First vertex with cumulative length >= s.
  const auto it = std::lower_bound(cum_length_.begin(), cum_length_.end(), s);
  if (it == cum_length_.begin()) return vertices_.front();
  const std::size_t hi = static_cast<std::size_t>(it - cum_length_.begin());
  const std::size_t lo = hi - 1;
  const double t = (s - cum_length_[lo]) / (cum_length_[hi] - cum_length_[lo]);
  return lerp(vertices_[lo], vertices_[hi], t);
}

Border::Projection Border::project(const Point& s) const {
  Projection best{vertices_.front(), std::numeric_limits<double>::infinity(), 0.0};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < vertices_.size(); ++i) {
    const double t = closest_param_on_segment(vertices_[i], vertices_[i + 1], s);
    const Point cand = lerp(vertices_[i], vertices_[i + 1], t);
    const double d2 = squared_norm(cand - s);
    // Strict < keeps the earliest (smallest arc length) candidate on ties.
    if (d2 < best_d2) {
      best_d2 = d2;
      best.point = cand;
      best.arclength = cum_length_[i] + t * (cum_length_[i + 1] - cum_length_[i]);
    }
  }
  best.distance = std::sqrt(best_d2);
  return best;
}

SentinelSet place_sentinels(const Border& border, int count) {
  if (count < 1) throw InputError("sentinel count must be >= 1, got " + std::to_string(count));
  const double total = border.total_length();
  if (!(total > 0.0)) throw InputError("cannot place sentinels on a zero-length border");
  SentinelSet out;
  out.spacing = total / count;
  out.points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.points.push_back(border.point_at_arclength((i + 0.5) * out.spacing));
  }
  return out;
}

bool polygon_contains(const Polygon& poly, const Point& p) {
  // Even-odd crossing count over all rings; holes fall out naturally.
  bool inside = false;
  for (const auto& ring : poly.rings) {
    const std::size_t n = ring.size();
    if (n < 3) continue;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Point& a = ring[j];
      const Point& b = ring[i];
      const bool crosses = (b.y > p.y) != (a.y > p.y);
      if (crosses && p.x < (a.x - b.x) * (p.y - b.y) / (a.y - b.y) + b.x) {
        inside = !inside;
      }
    }
  }
  return inside;
}

BufferGrid buffer_grid(const std::vector<Polygon>& regions, const Border& border,
                       double delta, double nu) {
  if (!(delta > 0.0)) throw InputError("buffer distance must be > 0");
  if (!(nu > 0.0)) throw InputError("grid spacing must be > 0");
  if (regions.empty()) throw InputError("buffer_grid needs at least one region polygon");

  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_y;
  for (const auto& poly : regions) {
    for (const auto& ring : poly.rings) {
      for (const auto& v : ring) {
        min_x = std::min(min_x, v.x);
        max_x = std::max(max_x, v.x);
        min_y = std::min(min_y, v.y);
        max_y = std::max(max_y, v.y);
      }
    }
  }

  BufferGrid out;
  out.spacing = nu;
  out.buffer = delta;
  for (double y = min_y + 0.5 * nu; y <= max_y; y += nu) {
    for (double x = min_x + 0.5 * nu; x <= max_x; x += nu) {
      const Point p{x, y};
      if (border.project(p).distance > delta) continue;
      const bool inside = std::any_of(regions.begin(), regions.end(),
                                      [&](const Polygon& poly) { return polygon_contains(poly, p); });
      if (inside) out.points.push_back(p);
    }
  }
  if (out.points.empty()) {
    throw InputError("buffer grid is empty; use a smaller grid spacing than " +
                     std::to_string(nu));
  }
  return out;
}

AngledSplit split_by_angle(std::span<const Point> points, double angle_deg) {
  const std::size_t n = points.size();
  if (n < 2) throw InputError("split_by_angle needs at least 2 points");

  const double theta = angle_deg * std::acos(-1.0) / 180.0;
  const Point dir{std::cos(theta), std::sin(theta)};
  const Point normal{-dir.y, dir.x};

  std::vector<double> coord(n);
  for (std::size_t i = 0; i < n; ++i) coord[i] = dot(normal, points[i]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return coord[a] < coord[b]; });

  // side_a gets floor(n/2) points; for odd n the median joins side_b.
  const std::size_t n_a = n / 2;
  if (coord[order[0]] == coord[order[n - 1]]) {
    throw InputError("cannot split: points are collinear along the requested line");
  }
  const double threshold = 0.5 * (coord[order[n_a - 1]] + coord[order[n_a]]);

  AngledSplit out{.side_a = {}, .side_b = {}, .border = Border({{0, 0}, {1, 0}})};
  for (std::size_t i = 0; i < n_a; ++i) out.side_a.push_back(static_cast<int>(order[i]));
  for (std::size_t i = n_a; i < n; ++i) out.side_b.push_back(static_cast<int>(order[i]));
  std::sort(out.side_a.begin(), out.side_a.end());
  std::sort(out.side_b.begin(), out.side_b.end());

  // Clip the line {p : normal . p = threshold} to the data bounding box,
  // padded a little so the border always spans the data.
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_y;
  for (const auto& p : points) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double pad = 1e-6 + 0.01 * std::max(max_x - min_x, max_y - min_y);
  min_x -= pad, max_x += pad, min_y -= pad, max_y += pad;

  const Point anchor = threshold * normal;  // a point on the line
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  const auto clip_slab = [&](double d, double a, double lo_s, double hi_s) {
    if (std::abs(d) < 1e-300) return;  // line parallel to this slab
    double t0 = (lo_s - a) / d, t1 = (hi_s - a) / d;
    if (t0 > t1) std::swap(t0, t1);
    t_min = std::max(t_min, t0);
    t_max = std::min(t_max, t1);
  };
  clip_slab(dir.x, anchor.x, min_x, max_x);
  clip_slab(dir.y, anchor.y, min_y, max_y);
  if (!(t_max > t_min)) {
    throw InputError("splitting line does not intersect the data bounding box");
  }
  out.border = Border({anchor + t_min * dir, anchor + t_max * dir});
  return out;
}

}  // namespace geordd
