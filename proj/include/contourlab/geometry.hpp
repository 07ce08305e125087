#pragma once

#include <vector>

namespace contourlab {

/// Continuous coordinates in final-image pixels (256-px frame).
struct PointPx {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const PointPx&, const PointPx&) = default;
};

struct Segment {
  PointPx a;
  PointPx b;

  friend bool operator==(const Segment&, const Segment&) = default;
};

/// Ordered vertices. A closed polyline repeats its first vertex at the end.
struct Polyline {
  std::vector<PointPx> points;
  bool closed = false;

  std::size_t segment_count() const { return points.empty() ? 0 : points.size() - 1; }
  Segment segment(std::size_t i) const { return {points[i], points[i + 1]}; }

  friend bool operator==(const Polyline&, const Polyline&) = default;
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
};

double distance(PointPx a, PointPx b);
double point_segment_distance(PointPx p, const Segment& s);
double segment_segment_distance(const Segment& s, const Segment& t);
/// Proper or touching intersection of two closed segments.
bool segments_intersect(const Segment& s, const Segment& t);
double polyline_distance(const Polyline& a, const Polyline& b);
double segment_polyline_distance(const Segment& s, const Polyline& p);
double length(const Segment& s);
PointPx midpoint(const Segment& s);
/// Interior angle at the shared vertex `b` of the path a-b-c, in radians [0, pi].
double vertex_angle(PointPx a, PointPx b, PointPx c);

BoundingBox bounding_box(const std::vector<PointPx>& points);
Polyline translated(const Polyline& p, double dx, double dy);

}  // namespace contourlab
