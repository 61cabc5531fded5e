#include <doctest.h>

#include <cmath>
#include <limits>

#include "geordd/geometry.hpp"
#include "geordd/rng.hpp"

using namespace geordd;

TEST_CASE("border validation") {
  CHECK_THROWS_AS(Border({{0, 0}}), InputError);
  CHECK_THROWS_AS(Border({{0, 0}, {0, 0}}), InputError);  // zero-length segment
  const Border b({{0, 0}, {1, 0}, {1, 1}});
  CHECK(b.total_length() == doctest::Approx(2.0));
  CHECK(b.cumulative_arclength().front() == 0.0);
  CHECK(b.cumulative_arclength()[1] == doctest::Approx(1.0));
}

TEST_CASE("place_sentinels midpoint rule") {
  const Border segment({{0, 0}, {1, 0}});
  SUBCASE("R=2 on a unit segment") {
    const SentinelSet s = place_sentinels(segment, 2);
    CHECK(s.points[0].x == doctest::Approx(0.25));
    CHECK(s.points[1].x == doctest::Approx(0.75));
    CHECK(s.points[0].y == 0.0);
  }
  SUBCASE("R=1 is the midpoint") {
    const SentinelSet s = place_sentinels(segment, 1);
    CHECK(s.points[0].x == doctest::Approx(0.5));
  }
  SUBCASE("L-shaped border, R=4") {
    const Border l({{0, 0}, {1, 0}, {1, 1}});
    const SentinelSet s = place_sentinels(l, 4);
    // Arc lengths 0.25, 0.75, 1.25, 1.75 walked by hand.
    CHECK(s.points[0].x == doctest::Approx(0.25));
    CHECK(s.points[0].y == doctest::Approx(0.0));
    CHECK(s.points[1].x == doctest::Approx(0.75));
    CHECK(s.points[2].x == doctest::Approx(1.0));
    CHECK(s.points[2].y == doctest::Approx(0.25));
    CHECK(s.points[3].y == doctest::Approx(0.75));
  }
  SUBCASE("invalid count") { CHECK_THROWS_AS(place_sentinels(segment, 0), InputError); }
}

TEST_CASE("sentinel arc-length gaps are equal") {
  Rng rng(7);
  std::vector<Point> vertices{{0, 0}};
  for (int i = 0; i < 6; ++i) {
    vertices.push_back({vertices.back().x + rng.uniform(0.1, 1.0),
                        vertices.back().y + rng.uniform(-1.0, 1.0)});
  }
  const Border border(vertices);
  const SentinelSet s = place_sentinels(border, 17);
  std::vector<double> arcs;
  for (const auto& p : s.points) arcs.push_back(border.project(p).arclength);
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    CHECK(arcs[i] - arcs[i - 1] ==
          doctest::Approx(border.total_length() / 17).epsilon(1e-9));
  }
}

TEST_CASE("project_to_border") {
  SUBCASE("perpendicular foot") {
    const Border b({{0, 0}, {1, 0}});
    const auto proj = b.project({0.5, 0.3});
    CHECK(proj.point.x == doctest::Approx(0.5));
    CHECK(proj.point.y == doctest::Approx(0.0));
    CHECK(proj.distance == doctest::Approx(0.3));
  }
  SUBCASE("endpoint clamp") {
    const Border b({{0, 0}, {1, 0}});
    const auto proj = b.project({2, 1});
    CHECK(proj.point.x == doctest::Approx(1.0));
    CHECK(proj.distance == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("tie broken toward the smaller arc length") {
    const Border v({{0, 0}, {1, 1}, {2, 0}});
    const auto proj = v.project({1, 0});
    CHECK(proj.point.x == doctest::Approx(0.5));
    CHECK(proj.point.y == doctest::Approx(0.5));
    CHECK(proj.distance == doctest::Approx(std::sqrt(0.5)));
  }
}

TEST_CASE("projection properties on random borders") {
  Rng rng(42);
  std::vector<Point> vertices{{0, 0}};
  for (int i = 0; i < 5; ++i) {
    vertices.push_back({vertices.back().x + rng.uniform(0.2, 1.0), rng.uniform(-1.0, 1.0)});
  }
  const Border border(vertices);

  for (int trial = 0; trial < 300; ++trial) {
    const Point s{rng.uniform(-1.0, 5.0), rng.uniform(-2.0, 2.0)};
    const auto proj = border.project(s);
    // Reported distance is the distance to the reported point.
    CHECK(distance(s, proj.point) == doctest::Approx(proj.distance).epsilon(1e-12));
    // No border vertex is closer than the reported distance.
    for (const auto& v : border.vertices()) {
      CHECK(proj.distance <= distance(s, v) + 1e-12);
    }
    // On-border points are fixpoints.
    const auto self = border.project(proj.point);
    CHECK(self.distance <= 1e-9 * border.total_length());

    // 1-Lipschitz in s.
    const Point s2{s.x + rng.uniform(-0.5, 0.5), s.y + rng.uniform(-0.5, 0.5)};
    CHECK(std::abs(border.project(s2).distance - proj.distance) <=
          distance(s, s2) + 1e-12);
  }
}

TEST_CASE("buffer_grid") {
  // Two unit squares facing each other across y = 0.
  const std::vector<Polygon> regions{
      Polygon{{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}}},
      Polygon{{{{0, -1}, {1, -1}, {1, 0}, {0, 0}, {0, -1}}}}};
  const Border border({{0, 0}, {1, 0}});
  SUBCASE("unbounded buffer keeps 4 points per half") {
    const BufferGrid grid =
        buffer_grid(regions, border, std::numeric_limits<double>::infinity(), 0.5);
    CHECK(grid.points.size() == 8);
    int above = 0;
    for (const auto& p : grid.points) above += p.y > 0 ? 1 : 0;
    CHECK(above == 4);
    CHECK(grid.points.front().x == doctest::Approx(0.25));
  }
  SUBCASE("buffer 0.3 keeps only the near rows") {
    const BufferGrid grid = buffer_grid(regions, border, 0.3, 0.5);
    CHECK(grid.points.size() == 4);
    for (const auto& p : grid.points) CHECK(std::abs(p.y) == doctest::Approx(0.25));
  }
  SUBCASE("spacing larger than the region is an error") {
    CHECK_THROWS_AS(buffer_grid(regions, border, 10.0, 5.0), InputError);
  }
}

TEST_CASE("split_by_angle") {
  SUBCASE("horizontal median split") {
    const std::vector<Point> pts{{0, 0}, {0, 1}, {0, 2}, {0, 3}};
    const AngledSplit split = split_by_angle(pts, 0.0);
    CHECK(split.side_a == std::vector<int>{0, 1});
    CHECK(split.side_b == std::vector<int>{2, 3});
  }
  SUBCASE("vertical line splits by x-median") {
    const std::vector<Point> pts{{0, 5}, {1, 2}, {2, 8}, {3, 1}};
    const AngledSplit split = split_by_angle(pts, 90.0);
    CHECK(split.side_a.size() == 2);
    const bool a_is_low = split.side_a == std::vector<int>{0, 1};
    const bool a_is_high = split.side_a == std::vector<int>{2, 3};
    CHECK((a_is_low || a_is_high));
  }
  SUBCASE("odd count: median joins side_b") {
    const std::vector<Point> pts{{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}};
    const AngledSplit split = split_by_angle(pts, 0.0);
    CHECK(split.side_a.size() == 2);
    CHECK(split.side_b.size() == 3);
    CHECK(split.side_b == std::vector<int>{2, 3, 4});
  }
  SUBCASE("collinear along the line direction is an error") {
    const std::vector<Point> pts{{0, 0}, {1, 0}, {2, 0}};
    CHECK_THROWS_AS(split_by_angle(pts, 0.0), InputError);
  }
  SUBCASE("implied border separates the sides") {
    Rng rng(3);
    std::vector<Point> pts;
    for (int i = 0; i < 21; ++i) pts.push_back({rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)});
    const AngledSplit split = split_by_angle(pts, 35.0);
    const auto& v0 = split.border.vertices().front();
    const auto& v1 = split.border.vertices().back();
    const Point dir = v1 - v0;
    for (const int i : split.side_a) {
      const double cross_a = dir.x * (pts[i].y - v0.y) - dir.y * (pts[i].x - v0.x);
      for (const int j : split.side_b) {
        const double cross_b = dir.x * (pts[j].y - v0.y) - dir.y * (pts[j].x - v0.x);
        CHECK(cross_a * cross_b <= 0.0);
      }
    }
  }
}
