#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "contourlab/geometry.hpp"
#include "contourlab/rng.hpp"

using namespace contourlab;

TEST_CASE("point and segment distances") {
  const Segment s{{0, 0}, {10, 0}};
  CHECK(point_segment_distance({5, 3}, s) == doctest::Approx(3.0));
  CHECK(point_segment_distance({-3, 4}, s) == doctest::Approx(5.0));
  CHECK(point_segment_distance({13, -4}, s) == doctest::Approx(5.0));
  CHECK(segment_segment_distance(s, {{0, 2}, {10, 2}}) == doctest::Approx(2.0));
  CHECK(segment_segment_distance(s, {{5, -1}, {5, 1}}) == 0.0);
  CHECK(length(s) == 10.0);
  CHECK(midpoint(s) == PointPx{5, 0});
}

TEST_CASE("intersection includes touching") {
  CHECK(segments_intersect({{0, 0}, {2, 2}}, {{0, 2}, {2, 0}}));
  CHECK(segments_intersect({{0, 0}, {2, 0}}, {{2, 0}, {3, 5}}));
  CHECK(segments_intersect({{0, 0}, {4, 0}}, {{1, 0}, {3, 0}}));
  CHECK_FALSE(segments_intersect({{0, 0}, {1, 0}}, {{2, 0}, {3, 0}}));
  CHECK_FALSE(segments_intersect({{0, 0}, {1, 1}}, {{0, 1}, {0.4, 0.9}}));
}

TEST_CASE("vertex angle") {
  CHECK(vertex_angle({1, 0}, {0, 0}, {0, 1}) == doctest::Approx(std::numbers::pi / 2));
  CHECK(vertex_angle({1, 0}, {0, 0}, {-1, 0}) == doctest::Approx(std::numbers::pi));
  CHECK(vertex_angle({1, 0}, {0, 0}, {2, 0}) == doctest::Approx(0.0));
}

TEST_CASE("bounding box and translation") {
  const Polyline p{{{1, 2}, {4, -1}, {3, 7}}, false};
  const auto b = bounding_box(p.points);
  CHECK(b.width() == 3.0);
  CHECK(b.height() == 8.0);
  const auto q = translated(p, 2, -1);
  CHECK(q.points[2] == PointPx{5, 6});
}

namespace {

Polyline random_walk(Rng& rng, int n, double x0, double y0) {
  Polyline p;
  PointPx at{x0, y0};
  for (int i = 0; i < n; ++i) {
    p.points.push_back(at);
    at.x += rng.uniform(-6, 6);
    at.y += rng.uniform(-6, 6);
  }
  return p;
}

}  // namespace

TEST_CASE("polyline_distance equals the brute-force minimum") {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const int na = 2 + static_cast<int>(rng.uniform_int(0, 120));
    const int nb = 2 + static_cast<int>(rng.uniform_int(0, 120));
    const Polyline a = random_walk(rng, na, rng.uniform(0, 256), rng.uniform(0, 256));
    const Polyline b = random_walk(rng, nb, rng.uniform(0, 256), rng.uniform(0, 256));
    double brute = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < a.segment_count(); ++i)
      for (std::size_t j = 0; j < b.segment_count(); ++j)
        brute = std::min(brute, segment_segment_distance(a.segment(i), b.segment(j)));
    REQUIRE(polyline_distance(a, b) == brute);
    REQUIRE(segment_polyline_distance(a.segment(0), b) ==
            doctest::Approx(polyline_distance(Polyline{{a.points[0], a.points[1]}, false}, b)));
  }
}
