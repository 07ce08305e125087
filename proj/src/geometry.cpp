#include "contourlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contourlab {

namespace {

double cross(PointPx o, PointPx a, PointPx b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(PointPx p, const Segment& s) {
  return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) &&
         std::min(s.a.y, s.b.y) <= p.y && p.y <= std::max(s.a.y, s.b.y);
}

}  // namespace

double distance(PointPx a, PointPx b) { return std::hypot(a.x - b.x, a.y - b.y); }

double point_segment_distance(PointPx p, const Segment& s) {
  const double dx = s.b.x - s.a.x;
  const double dy = s.b.y - s.a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, s.a);
  const double t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
  return distance(p, {s.a.x + t * dx, s.a.y + t * dy});
}

bool segments_intersect(const Segment& s, const Segment& t) {
  const double d1 = cross(t.a, t.b, s.a);
  const double d2 = cross(t.a, t.b, s.b);
  const double d3 = cross(s.a, s.b, t.a);
  const double d4 = cross(s.a, s.b, t.b);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  if (d1 == 0 && on_segment(s.a, t)) return true;
  if (d2 == 0 && on_segment(s.b, t)) return true;
  if (d3 == 0 && on_segment(t.a, s)) return true;
  if (d4 == 0 && on_segment(t.b, s)) return true;
  return false;
}

double segment_segment_distance(const Segment& s, const Segment& t) {
  if (segments_intersect(s, t)) return 0.0;
  return std::min({point_segment_distance(s.a, t), point_segment_distance(s.b, t),
                   point_segment_distance(t.a, s), point_segment_distance(t.b, s)});
}

double segment_polyline_distance(const Segment& s, const Polyline& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.segment_count(); ++i)
    best = std::min(best, segment_segment_distance(s, p.segment(i)));
  return best;
}

namespace {

struct Block {
  std::size_t first = 0;
  std::size_t last = 0;
  BoundingBox box;
};

constexpr std::size_t kBlockSegments = 16;

std::vector<Block> segment_blocks(const Polyline& p) {
  std::vector<Block> out;
  const std::size_t n = p.segment_count();
  for (std::size_t first = 0; first < n; first += kBlockSegments) {
    Block b;
    b.first = first;
    b.last = std::min(n, first + kBlockSegments);
    b.box = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t i = first; i < b.last; ++i)
      for (PointPx q : {p.segment(i).a, p.segment(i).b}) {
        b.box.min_x = std::min(b.box.min_x, q.x);
        b.box.min_y = std::min(b.box.min_y, q.y);
        b.box.max_x = std::max(b.box.max_x, q.x);
        b.box.max_y = std::max(b.box.max_y, q.y);
      }
    out.push_back(b);
  }
  return out;
}

double box_distance(const BoundingBox& a, const BoundingBox& b) {
  const double dx = std::max({0.0, a.min_x - b.max_x, b.min_x - a.max_x});
  const double dy = std::max({0.0, a.min_y - b.max_y, b.min_y - a.max_y});
  return std::hypot(dx, dy);
}

}  // namespace

double polyline_distance(const Polyline& a, const Polyline& b) {
  // Block pairs are visited nearest-box first, so most pairs are never refined.
  const auto ba = segment_blocks(a);
  const auto bb = segment_blocks(b);
  std::vector<std::pair<double, std::pair<std::size_t, std::size_t>>> pairs;
  pairs.reserve(ba.size() * bb.size());
  for (std::size_t i = 0; i < ba.size(); ++i)
    for (std::size_t j = 0; j < bb.size(); ++j) pairs.push_back({box_distance(ba[i].box, bb[j].box), {i, j}});
  std::sort(pairs.begin(), pairs.end());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [bound, ij] : pairs) {
    if (bound >= best) break;
    const Block& x = ba[ij.first];
    const Block& y = bb[ij.second];
    for (std::size_t i = x.first; i < x.last; ++i)
      for (std::size_t j = y.first; j < y.last; ++j)
        best = std::min(best, segment_segment_distance(a.segment(i), b.segment(j)));
  }
  return best;
}

double length(const Segment& s) { return distance(s.a, s.b); }

PointPx midpoint(const Segment& s) { return {(s.a.x + s.b.x) / 2.0, (s.a.y + s.b.y) / 2.0}; }

double vertex_angle(PointPx a, PointPx b, PointPx c) {
  const double ux = a.x - b.x, uy = a.y - b.y;
  const double vx = c.x - b.x, vy = c.y - b.y;
  return std::abs(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
}

BoundingBox bounding_box(const std::vector<PointPx>& points) {
  BoundingBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                  -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    box.min_x = std::min(box.min_x, p.x);
    box.min_y = std::min(box.min_y, p.y);
    box.max_x = std::max(box.max_x, p.x);
    box.max_y = std::max(box.max_y, p.y);
  }
  return box;
}

Polyline translated(const Polyline& p, double dx, double dy) {
  Polyline out = p;
  for (auto& q : out.points) {
    q.x += dx;
    q.y += dy;
  }
  return out;
}

}  // namespace contourlab
