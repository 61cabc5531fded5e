#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "geordd/errors.hpp"

namespace geordd {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator-(const Point& a, const Point& b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(const Point& a, const Point& b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator*(double c, const Point& p) { return {c * p.x, c * p.y}; }
inline double dot(const Point& a, const Point& b) { return a.x * b.x + a.y * b.y; }
inline double squared_norm(const Point& p) { return p.x * p.x + p.y * p.y; }
inline double norm(const Point& p) { return std::hypot(p.x, p.y); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

/// Ordered open polyline with an arc-length parametrization. Closed rings are
/// represented by repeating the first vertex last.
class Border {
 public:
  explicit Border(std::vector<Point> vertices);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<double>& cumulative_arclength() const { return cum_length_; }
  double total_length() const { return cum_length_.back(); }

  /// Point at arc length s, clamped to [0, total_length].
  Point point_at_arclength(double s) const;

  struct Projection {
    Point point;       // nearest point on the border
    double distance;   // Euclidean distance to it
    double arclength;  // arc-length parameter of the nearest point
  };

  /// Nearest border point. Ties are broken by the smallest arc-length
  /// parameter, so the result is deterministic even at equidistant corners.
  Projection project(const Point& s) const;

 private:
  std::vector<Point> vertices_;
  std::vector<double> cum_length_;
};

struct SentinelSet {
  std::vector<Point> points;
  double spacing = 0.0;  // arc length between consecutive sentinels

  int count() const { return static_cast<int>(points.size()); }
};

/// R sentinels at the midpoints of R equal arc-length cells: arc lengths
/// (i - 1/2) * L / R. Midpoints avoid duplicated corner sentinels when a
/// border is assembled from several polylines.
SentinelSet place_sentinels(const Border& border, int count);

/// Polygon as one outer ring plus optional hole rings; containment is tested
/// even-odd, so holes need no special casing.
struct Polygon {
  std::vector<std::vector<Point>> rings;
};

bool polygon_contains(const Polygon& poly, const Point& p);

struct BufferGrid {
  std::vector<Point> points;
  double spacing = 0.0;
  double buffer = 0.0;
};

/// Cell-centered lattice with spacing nu over the bounding box of the region
/// polygons, clipped to points inside some polygon with dist to border <= delta.
BufferGrid buffer_grid(const std::vector<Polygon>& regions, const Border& border,
                       double delta, double nu);

struct AngledSplit {
  std::vector<int> side_a;  // smaller signed perpendicular coordinate
  std::vector<int> side_b;  // larger; receives the median point for odd counts
  Border border;            // splitting line clipped to the data bounding box
};

/// Splits points in half by a line at `angle_deg` counter-clockwise from
/// horizontal, positioned at the median of the signed perpendicular coordinate.
AngledSplit split_by_angle(std::span<const Point> points, double angle_deg);

}  // namespace geordd
