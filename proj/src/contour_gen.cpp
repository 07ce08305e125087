#include "contourlab/contour_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "contourlab/error.hpp"

namespace contourlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTol = 1e-9;

std::string fmt_point(PointPx p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.3f,%.3f)", p.x, p.y);
  return buf;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

PointPx polar(PointPx center, double r, double phi) {
  return {center.x + r * std::cos(phi), center.y + r * std::sin(phi)};
}

/// Distinct vertices of a polyline; a closed polyline drops its repeated end.
std::size_t vertex_count(const Polyline& p) {
  return p.closed ? p.points.size() - 1 : p.points.size();
}

void check_polyline(const Polyline& p, const std::string& name, std::vector<Violation>& out) {
  if (p.points.size() < 2) {
    out.push_back({"polyline-degenerate", name + " has fewer than 2 points"});
    return;
  }
  if (p.closed && !(p.points.front() == p.points.back()))
    out.push_back({"closure", name + " is marked closed but first != last"});
  if (!p.closed && p.points.front() == p.points.back())
    out.push_back({"closure", name + " is marked open but first == last"});
  for (const auto& q : p.points) {
    if (!std::isfinite(q.x) || !std::isfinite(q.y)) {
      out.push_back({"polyline-degenerate", name + " has a non-finite point"});
      return;
    }
  }
  for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
    if (p.points[i] == p.points[i + 1]) {
      out.push_back({"polyline-degenerate", name + " repeats point " + fmt_point(p.points[i])});
      return;
    }
  }
}

bool flanker_is_lines(const Flanker& f) { return f.kind == FlankerKind::Lines; }

PointPx line_flanker_center(const Flanker& f) {
  const auto& pts = f.strokes.front().points;
  double x = 0.0, y = 0.0;
  const std::size_t segs = pts.size() - 1;
  for (std::size_t i = 0; i < segs; ++i) {
    PointPx m = midpoint({pts[i], pts[i + 1]});
    x += m.x;
    y += m.y;
  }
  return {x / static_cast<double>(segs), y / static_cast<double>(segs)};
}

double stroke_distance(const std::vector<Polyline>& strokes, const Polyline& target) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : strokes) best = std::min(best, polyline_distance(s, target));
  return best;
}

/// Line flanker with its center at the origin.
Flanker make_line_flanker_shape(Rng& rng, const std::vector<double>& lengths, const VariantConfig& cfg) {
  Flanker f;
  f.kind = FlankerKind::Lines;
  f.segment_lengths = lengths;
  const double orientation = rng.uniform(0.0, kTwoPi);
  Polyline stroke;
  if (lengths.size() == 1) {
    const double h = lengths[0] / 2.0;
    stroke.points = {{-h * std::cos(orientation), -h * std::sin(orientation)},
                     {h * std::cos(orientation), h * std::sin(orientation)}};
  } else {
    const double min_angle = cfg.min_flanker_angle_deg * std::numbers::pi / 180.0;
    const double between = rng.uniform(min_angle, std::numbers::pi);
    PointPx a{lengths[0] * std::cos(orientation), lengths[0] * std::sin(orientation)};
    PointPx c{lengths[1] * std::cos(orientation + between), lengths[1] * std::sin(orientation + between)};
    // The center is the mean of the two segment midpoints: (a + c) / 4.
    const PointPx center{(a.x + c.x) / 4.0, (a.y + c.y) / 4.0};
    stroke.points = {{a.x - center.x, a.y - center.y},
                     {-center.x, -center.y},
                     {c.x - center.x, c.y - center.y}};
  }
  f.strokes.push_back(std::move(stroke));
  return f;
}

std::vector<double> sample_segment_lengths(Rng& rng, const VariantConfig& cfg) {
  const bool two = rng.uniform() < cfg.two_segment_probability;
  if (!two) return {rng.uniform(cfg.segment_length.lo, cfg.segment_length.hi)};
  if (!cfg.asymmetric_flankers) {
    const double len = rng.uniform(cfg.segment_length.lo, cfg.segment_length.hi);
    return {len, len};
  }
  const double shorter = rng.uniform(cfg.short_segment_length.lo, cfg.short_segment_length.hi);
  const double longer = rng.uniform(cfg.segment_length.lo, cfg.segment_length.hi);
  if (rng.coin()) return {shorter, longer};
  return {longer, shorter};
}

std::vector<Flanker> sample_line_flankers(Rng& rng, const MainContour& main, const VariantConfig& cfg) {
  const int count = static_cast<int>(rng.uniform_int(cfg.flanker_count.lo, cfg.flanker_count.hi));
  std::vector<Flanker> flankers;
  flankers.reserve(static_cast<std::size_t>(count));
  const double frame = cfg.frame_size;
  for (int i = 0; i < count; ++i) {
    const auto lengths = sample_segment_lengths(rng, cfg);
    bool placed = false;
    for (int attempt = 0; attempt < cfg.flanker_retry_budget && !placed; ++attempt) {
      Flanker shape = make_line_flanker_shape(rng, lengths, cfg);
      const PointPx center{rng.uniform(0.0, frame), rng.uniform(0.0, frame)};
      bool ok = true;
      for (const auto& other : flankers) {
        if (distance(center, other.center) < cfg.min_flanker_center_distance) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      shape.strokes.front() = translated(shape.strokes.front(), center.x, center.y);
      shape.center = line_flanker_center(shape);
      if (stroke_distance(shape.strokes, main.closed) < cfg.min_flanker_contour_distance ||
          stroke_distance(shape.strokes, main.open) < cfg.min_flanker_contour_distance)
        continue;
      flankers.push_back(std::move(shape));
      placed = true;
    }
    if (!placed)
      throw ConstraintError("flanker " + std::to_string(i) + ": retry budget of " +
                            std::to_string(cfg.flanker_retry_budget) + " exhausted");
  }
  return flankers;
}

std::vector<Flanker> sample_curvy_flankers(Rng& rng, const MainContour& main, const VariantConfig& cfg) {
  std::vector<int> free_anchors;
  for (int a = 0; a < static_cast<int>(cfg.anchors.size()); ++a)
    if (!main.anchor || *main.anchor != a) free_anchors.push_back(a);
  if (free_anchors.empty()) throw ConstraintError("no free anchor for curvy flankers");
  const int hi = std::min<int>(cfg.flanker_count.hi, static_cast<int>(free_anchors.size()));
  const int count = static_cast<int>(rng.uniform_int(cfg.flanker_count.lo, hi));

  std::vector<Flanker> flankers;
  std::vector<Polyline> occupied{main.closed, main.open};
  for (int i = 0; i < count; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < cfg.flanker_retry_budget && !placed; ++attempt) {
      const auto pick = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(free_anchors.size()) - 1));
      const int anchor = free_anchors[pick];
      const PointPx center = cfg.anchors[static_cast<std::size_t>(anchor)];
      const CurvyParams params =
          sample_curvy_params(rng, cfg, cfg.curvy_flanker_diameter, center, cfg.anchor_max_radius);
      const Polyline full = closed_curvy(params, cfg.curvy_samples);
      bool ok = true;
      for (const auto& other : occupied) {
        if (polyline_distance(full, other) < cfg.min_flanker_contour_distance) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      Flanker f;
      f.kind = cfg.flanker_kind;
      f.center = center;
      f.curvy = params;
      f.anchor = anchor;
      if (cfg.flanker_kind == FlankerKind::OpenCurvy)
        f.strokes = {open_curvy(params, cfg.curvy_open_angle, cfg.curvy_samples)};
      else
        f.strokes = dash_contour(params, cfg.dash_count, cfg.dash_angle, cfg.curvy_samples);
      occupied.push_back(full);
      flankers.push_back(std::move(f));
      free_anchors.erase(free_anchors.begin() + static_cast<std::ptrdiff_t>(pick));
      placed = true;
    }
    if (!placed)
      throw ConstraintError("curvy flanker " + std::to_string(i) + ": retry budget of " +
                            std::to_string(cfg.flanker_retry_budget) + " exhausted");
  }
  return flankers;
}

void check_curvy(const CurvyParams& p, const VariantConfig& cfg, Range diameter,
                 const std::string& name, std::vector<Violation>& out) {
  if (!cfg.curvy_amplitude.contains(p.amplitude1) || !cfg.curvy_amplitude.contains(p.amplitude2))
    out.push_back({"curvy-amplitude", name + " amplitude outside range"});
  if (!cfg.curvy_frequency.contains(p.frequency1) || !cfg.curvy_frequency.contains(p.frequency2))
    out.push_back({"curvy-frequency", name + " frequency outside range"});
  const double d = 2.0 * p.base_radius;
  if (d < diameter.lo - kTol || d > diameter.hi + kTol)
    out.push_back({"curvy-diameter", name + " diameter " + fmt_num(d) + " outside range"});
}

}  // namespace

// ---------------------------------------------------------------------------
// Polygon main contour

PolygonMainSpec sample_polygon_spec(Rng& rng, int n, const VariantConfig& cfg) {
  if (n < 3 || n > 14) throw UsageError("polygon edge count must be in [3, 14], got " + std::to_string(n));
  PolygonMainSpec spec;
  spec.n = n;
  spec.angles.resize(static_cast<std::size_t>(n));
  spec.radii.resize(static_cast<std::size_t>(n));
  for (auto& a : spec.angles) a = rng.uniform(0.0, kTwoPi);
  std::sort(spec.angles.begin(), spec.angles.end());
  const Range r = cfg.polygon_radius;
  // (lo, hi]: a zero radius would place the corner at the center
  for (auto& radius : spec.radii) radius = r.hi - (r.hi - r.lo) * rng.uniform();
  spec.gap_angle_index = static_cast<int>(rng.uniform_int(0, n - 1));
  spec.gap_distance = rng.uniform(cfg.gap_distance.lo, cfg.gap_distance.hi);
  const double base = spec.radii[static_cast<std::size_t>(spec.gap_angle_index)];
  const bool up_ok = base + spec.gap_distance <= r.hi;
  const bool down_ok = base - spec.gap_distance > r.lo;
  // At least one side always fits because gap_distance.hi <= (r.hi - r.lo) / 2.
  bool up = up_ok;
  if (up_ok && down_ok) up = rng.coin();
  spec.gap_radius = up ? base + spec.gap_distance : base - spec.gap_distance;
  return spec;
}

Polyline polygon_closed(const PolygonMainSpec& spec) {
  Polyline p;
  p.closed = true;
  const auto n = static_cast<std::size_t>(spec.n);
  const auto k = static_cast<std::size_t>(spec.gap_angle_index);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (k + i) % n;
    p.points.push_back(polar(spec.center, spec.radii[j], spec.angles[j]));
  }
  p.points.push_back(p.points.front());
  return p;
}

Polyline polygon_open(const PolygonMainSpec& spec) {
  Polyline p = polygon_closed(spec);
  p.closed = false;
  const auto k = static_cast<std::size_t>(spec.gap_angle_index);
  p.points.front() = polar(spec.center, spec.gap_radius, spec.angles[k]);
  return p;
}

std::vector<Violation> polygon_shape_violations(const Polyline& p, double min_corner_edge_distance) {
  std::vector<Violation> out;
  const std::size_t m = vertex_count(p);
  const std::size_t edges = p.segment_count();
  auto adjacent = [&](std::size_t vertex, std::size_t edge) {
    if (edge == vertex) return true;
    if (p.closed) return (vertex + m - 1) % m == edge;
    return vertex > 0 && edge == vertex - 1;
  };
  for (std::size_t v = 0; v < m; ++v) {
    for (std::size_t e = 0; e < edges; ++e) {
      if (adjacent(v, e)) continue;
      const double d = point_segment_distance(p.points[v], p.segment(e));
      if (d < min_corner_edge_distance - kTol) {
        out.push_back({"corner-edge-distance", "corner " + fmt_point(p.points[v]) + " is " + fmt_num(d) +
                                                   " px from edge " + fmt_point(p.segment(e).a) + "-" +
                                                   fmt_point(p.segment(e).b)});
      }
    }
  }
  auto share_vertex = [&](std::size_t e, std::size_t f) {
    if (e + 1 == f || f + 1 == e) return true;
    return p.closed && ((e == 0 && f == edges - 1) || (f == 0 && e == edges - 1));
  };
  for (std::size_t e = 0; e < edges; ++e) {
    for (std::size_t f = e + 1; f < edges; ++f) {
      if (share_vertex(e, f)) continue;
      if (segments_intersect(p.segment(e), p.segment(f)))
        out.push_back({"self-intersection", "edges " + fmt_point(p.segment(e).a) + "-" +
                                                fmt_point(p.segment(e).b) + " and " +
                                                fmt_point(p.segment(f).a) + "-" + fmt_point(p.segment(f).b) +
                                                " cross"});
    }
  }
  return out;
}

MainContour sample_polygon_main(Rng& rng, int n, const VariantConfig& cfg) {
  for (int attempt = 0; attempt < cfg.main_retry_budget; ++attempt) {
    PolygonMainSpec spec = sample_polygon_spec(rng, n, cfg);
    Polyline closed = polygon_closed(spec);
    Polyline open = polygon_open(spec);
    if (!polygon_shape_violations(closed, cfg.min_corner_edge_distance).empty() ||
        !polygon_shape_violations(open, cfg.min_corner_edge_distance).empty())
      continue;
    std::vector<PointPx> all = closed.points;
    all.push_back(open.points.front());
    const BoundingBox box = bounding_box(all);
    const double frame = cfg.frame_size;
    if (box.width() > frame || box.height() > frame) continue;
    spec.center = {rng.uniform(-box.min_x, frame - box.max_x), rng.uniform(-box.min_y, frame - box.max_y)};
    MainContour main;
    main.closed = polygon_closed(spec);
    main.open = polygon_open(spec);
    main.polygon = std::move(spec);
    return main;
  }
  throw ConstraintError("polygon main contour (n=" + std::to_string(n) + "): retry budget of " +
                        std::to_string(cfg.main_retry_budget) + " exhausted");
}

// ---------------------------------------------------------------------------
// Radial-frequency contours

double eval_curvy_radius(const CurvyParams& p, double phi) {
  return p.amplitude1 * std::sin(p.frequency1 * (phi + p.phase1)) +
         p.amplitude2 * std::sin(p.frequency2 * (phi + p.phase2)) + p.base_radius;
}

PointPx curvy_point(const CurvyParams& p, double phi) {
  return polar(p.center, eval_curvy_radius(p, phi), phi);
}

Polyline curvy_arc(const CurvyParams& p, double phi_begin, double phi_end, int samples_per_circle) {
  const double step = kTwoPi / samples_per_circle;
  const double eps = 1e-9;
  Polyline arc;
  arc.points.push_back(curvy_point(p, phi_begin));
  // interior vertices sit on the same angular grid as the closed contour
  for (auto j = static_cast<long>(std::floor(phi_begin / step)) + 1;; ++j) {
    const double phi = static_cast<double>(j) * step;
    if (phi <= phi_begin + eps) continue;
    if (phi >= phi_end - eps) break;
    arc.points.push_back(curvy_point(p, phi));
  }
  arc.points.push_back(curvy_point(p, phi_end));
  return arc;
}

Polyline closed_curvy(const CurvyParams& p, int samples_per_circle) {
  Polyline c;
  c.closed = true;
  const double step = kTwoPi / samples_per_circle;
  for (int j = 0; j < samples_per_circle; ++j) c.points.push_back(curvy_point(p, j * step));
  c.points.push_back(c.points.front());
  return c;
}

Polyline open_curvy(const CurvyParams& p, double open_angle, int samples_per_circle) {
  return curvy_arc(p, p.open_phase + open_angle, p.open_phase + kTwoPi, samples_per_circle);
}

std::vector<PhaseInterval> dash_intervals(int dash_count, double dash_angle) {
  std::vector<PhaseInterval> visible;
  const double period = kTwoPi / dash_count;
  for (int i = 0; i < dash_count; ++i)
    visible.push_back({i * period + dash_angle, (i + 1) * period});
  return visible;
}

std::vector<PhaseInterval> subtract_interval(const std::vector<PhaseInterval>& visible,
                                             PhaseInterval removed) {
  std::vector<PhaseInterval> cuts;
  if (removed.end > kTwoPi) {
    cuts.push_back({removed.begin, kTwoPi});
    cuts.push_back({0.0, removed.end - kTwoPi});
  } else {
    cuts.push_back(removed);
  }
  std::vector<PhaseInterval> current = visible;
  for (const auto& cut : cuts) {
    std::vector<PhaseInterval> next;
    for (const auto& v : current) {
      if (cut.end <= v.begin || cut.begin >= v.end) {
        next.push_back(v);
        continue;
      }
      if (cut.begin > v.begin + 1e-9) next.push_back({v.begin, cut.begin});
      if (cut.end < v.end - 1e-9) next.push_back({cut.end, v.end});
    }
    current = std::move(next);
  }
  std::sort(current.begin(), current.end(),
            [](const PhaseInterval& a, const PhaseInterval& b) { return a.begin < b.begin; });
  return current;
}

std::vector<Polyline> dash_contour(const CurvyParams& p, int dash_count, double dash_angle,
                                   int samples_per_circle) {
  std::vector<Polyline> arcs;
  for (const auto& iv : dash_intervals(dash_count, dash_angle))
    arcs.push_back(curvy_arc(p, iv.begin, iv.end, samples_per_circle));
  return arcs;
}

std::vector<Polyline> dash_open_contour(const CurvyParams& p, double open_angle, int dash_count,
                                        double dash_angle, int samples_per_circle) {
  const double start = std::fmod(p.open_phase, kTwoPi);
  const auto visible = subtract_interval(dash_intervals(dash_count, dash_angle), {start, start + open_angle});
  std::vector<Polyline> arcs;
  for (const auto& iv : visible) arcs.push_back(curvy_arc(p, iv.begin, iv.end, samples_per_circle));
  return arcs;
}

CurvyParams sample_curvy_params(Rng& rng, const VariantConfig& cfg, Range diameter, PointPx center,
                                double max_radius) {
  const double step = kTwoPi / cfg.curvy_samples;
  // between grid angles the curve can bulge slightly beyond the sampled maximum
  const double bulge_margin = 0.5;
  for (int attempt = 0; attempt < cfg.main_retry_budget; ++attempt) {
    CurvyParams p;
    p.center = center;
    p.base_radius = rng.uniform(diameter.lo, diameter.hi) / 2.0;
    p.amplitude1 = rng.uniform(cfg.curvy_amplitude.lo, cfg.curvy_amplitude.hi);
    p.amplitude2 = rng.uniform(cfg.curvy_amplitude.lo, cfg.curvy_amplitude.hi);
    p.frequency1 = static_cast<int>(rng.uniform_int(cfg.curvy_frequency.lo, cfg.curvy_frequency.hi));
    p.frequency2 = static_cast<int>(rng.uniform_int(cfg.curvy_frequency.lo, cfg.curvy_frequency.hi));
    p.phase1 = rng.uniform(0.0, kTwoPi);
    p.phase2 = rng.uniform(0.0, kTwoPi);
    p.open_phase = rng.uniform(0.0, kTwoPi);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int j = 0; j < cfg.curvy_samples; ++j) {
      const double r = eval_curvy_radius(p, j * step);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    if (lo >= cfg.curvy_min_radius + bulge_margin && hi <= max_radius - bulge_margin) return p;
  }
  throw ConstraintError("curvy contour: retry budget of " + std::to_string(cfg.main_retry_budget) +
                        " exhausted");
}

MainContour sample_curvy_main(Rng& rng, const VariantConfig& cfg) {
  MainContour main;
  PointPx center{cfg.frame_size / 2.0, cfg.frame_size / 2.0};
  double max_radius = cfg.frame_size / 2.0;
  if (cfg.placement == Placement::Anchors) {
    if (cfg.anchors.empty()) throw ConstraintError("variant " + cfg.id + " has anchor placement but no anchors");
    const int anchor = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(cfg.anchors.size()) - 1));
    main.anchor = anchor;
    center = cfg.anchors[static_cast<std::size_t>(anchor)];
    max_radius = cfg.anchor_max_radius;
  }
  CurvyParams p = sample_curvy_params(rng, cfg, cfg.curvy_diameter, center, max_radius);
  main.closed = closed_curvy(p, cfg.curvy_samples);
  main.open = open_curvy(p, cfg.curvy_open_angle, cfg.curvy_samples);
  main.curvy = p;
  return main;
}

// ---------------------------------------------------------------------------
// Flankers and pairs

std::vector<Flanker> sample_flankers(Rng& rng, const MainContour& main, const VariantConfig& cfg) {
  switch (cfg.flanker_kind) {
    case FlankerKind::None: return {};
    case FlankerKind::Lines: return sample_line_flankers(rng, main, cfg);
    case FlankerKind::DashedClosedCurvy:
    case FlankerKind::OpenCurvy: return sample_curvy_flankers(rng, main, cfg);
  }
  return {};
}

std::vector<Polyline> main_strokes(const StimulusGeometry& g, const VariantConfig& cfg) {
  const bool open = g.member == Member::Open;
  if (g.dashed_main && g.curvy) {
    if (open)
      return dash_open_contour(*g.curvy, cfg.curvy_open_angle, cfg.dash_count, cfg.dash_angle,
                               cfg.curvy_samples);
    return dash_contour(*g.curvy, cfg.dash_count, cfg.dash_angle, cfg.curvy_samples);
  }
  return {open ? g.main_open : g.main_closed};
}

StimulusPair generate_pair(std::uint64_t master_seed, const VariantConfig& cfg, std::uint64_t index) {
  const std::uint64_t seed = derive_seed(master_seed, cfg.id, index);
  Rng rng(seed);
  StimulusGeometry g;
  g.variant_id = cfg.id;
  g.pair_id = index;
  g.seed = seed;
  g.dashed_main = cfg.dashed_main;
  try {
    MainContour main;
    if (cfg.main_shape == MainShape::Polygon) {
      const int n = static_cast<int>(rng.uniform_int(cfg.polygon_edges.lo, cfg.polygon_edges.hi));
      main = sample_polygon_main(rng, n, cfg);
    } else {
      main = sample_curvy_main(rng, cfg);
    }
    g.flankers = sample_flankers(rng, main, cfg);
    g.main_closed = std::move(main.closed);
    g.main_open = std::move(main.open);
    g.polygon = std::move(main.polygon);
    g.curvy = std::move(main.curvy);
  } catch (const ConstraintError& e) {
    throw ConstraintError("variant " + cfg.id + ", index " + std::to_string(index) + ", seed " +
                          std::to_string(seed) + ": " + e.what());
  }
  StimulusPair pair{g, g};
  pair.open.member = Member::Open;
  pair.closed.member = Member::Closed;
  return pair;
}

std::vector<Violation> validate_geometry(const StimulusGeometry& g, const VariantConfig& cfg) {
  std::vector<Violation> raw;
  check_polyline(g.main_closed, "closed main contour", raw);
  check_polyline(g.main_open, "open main contour", raw);
  if (!g.main_closed.closed) raw.push_back({"closure", "closed main contour is not marked closed"});
  if (!raw.empty()) return raw;

  const double frame = cfg.frame_size;
  for (const auto* p : {&g.main_closed, &g.main_open}) {
    for (const auto& q : p->points) {
      if (q.x < -kTol || q.y < -kTol || q.x > frame + kTol || q.y > frame + kTol) {
        raw.push_back({"bounds", "main contour point " + fmt_point(q) + " outside the frame"});
        break;
      }
    }
  }

  if (cfg.main_shape == MainShape::Polygon) {
    const auto edges = static_cast<int>(g.main_closed.segment_count());
    if (!cfg.polygon_edges.contains(edges))
      raw.push_back({"edge-count", "polygon has " + std::to_string(edges) + " edges"});
    if (g.main_open.segment_count() != g.main_closed.segment_count())
      raw.push_back({"gap", "open and closed versions have different edge counts"});
    if (g.polygon) {
      for (double r : g.polygon->radii)
        if (r <= cfg.polygon_radius.lo || r > cfg.polygon_radius.hi + kTol)
          raw.push_back({"radius", "corner radius " + fmt_num(r) + " outside range"});
    }
    const double gap = distance(g.main_open.points.front(), g.main_open.points.back());
    if (gap < cfg.gap_distance.lo - kTol || gap > cfg.gap_distance.hi + kTol)
      raw.push_back({"gap-distance", "open gap is " + fmt_num(gap) + " px"});
    for (const auto* p : {&g.main_closed, &g.main_open})
      for (auto& v : polygon_shape_violations(*p, cfg.min_corner_edge_distance)) raw.push_back(std::move(v));
  } else {
    if (!g.curvy) {
      raw.push_back({"curvy-params", "curvy main contour without parameters"});
    } else {
      check_curvy(*g.curvy, cfg, cfg.curvy_diameter, "main contour", raw);
      for (const auto& q : g.main_closed.points) {
        if (distance(q, g.curvy->center) < cfg.curvy_min_radius - kTol) {
          raw.push_back({"curvy-radius", "main contour radius below minimum at " + fmt_point(q)});
          break;
        }
      }
    }
    if (distance(g.main_open.points.front(), g.main_open.points.back()) <= kTol)
      raw.push_back({"gap", "open curvy contour has no gap"});
  }

  const auto count = static_cast<int>(g.flankers.size());
  if (cfg.flanker_kind == FlankerKind::None) {
    if (count != 0) raw.push_back({"flanker-count", "variant allows no flankers, found " + std::to_string(count)});
  } else if (!cfg.flanker_count.contains(count)) {
    raw.push_back({"flanker-count", std::to_string(count) + " flankers outside range"});
  }

  const double min_angle = cfg.min_flanker_angle_deg * std::numbers::pi / 180.0;
  for (std::size_t i = 0; i < g.flankers.size(); ++i) {
    const Flanker& f = g.flankers[i];
    const std::string name = "flanker " + std::to_string(i);
    if (f.kind != cfg.flanker_kind) raw.push_back({"flanker-kind", name + " has the wrong kind"});
    if (f.strokes.empty()) {
      raw.push_back({"flanker-shape", name + " has no strokes"});
      continue;
    }
    if (flanker_is_lines(f)) {
      const auto& pts = f.strokes.front().points;
      if (f.strokes.size() != 1 || pts.size() < 2 || pts.size() > 3) {
        raw.push_back({"flanker-shape", name + " must have one or two segments"});
        continue;
      }
      std::vector<double> lengths;
      for (std::size_t s = 0; s + 1 < pts.size(); ++s) lengths.push_back(length({pts[s], pts[s + 1]}));
      auto in = [](Range r, double v) { return v >= r.lo - kTol && v <= r.hi + kTol; };
      if (lengths.size() == 2 && cfg.asymmetric_flankers) {
        const double shorter = std::min(lengths[0], lengths[1]);
        const double longer = std::max(lengths[0], lengths[1]);
        if (!in(cfg.short_segment_length, shorter) || !in(cfg.segment_length, longer))
          raw.push_back({"segment-length", name + " asymmetric segment lengths " + fmt_num(shorter) + "/" +
                                               fmt_num(longer) + " outside ranges"});
      } else {
        for (double len : lengths)
          if (!in(cfg.segment_length, len))
            raw.push_back({"segment-length", name + " segment length " + fmt_num(len) + " outside range"});
        if (lengths.size() == 2 && std::abs(lengths[0] - lengths[1]) > 1e-6)
          raw.push_back({"equal-length", name + " segments differ in length"});
      }
      if (pts.size() == 3) {
        const double angle = vertex_angle(pts[0], pts[1], pts[2]);
        if (angle < min_angle - kTol)
          raw.push_back({"flanker-angle", name + " segments meet at " +
                                              fmt_num(angle * 180.0 / std::numbers::pi) + " deg"});
      }
      const PointPx center = line_flanker_center(f);
      for (std::size_t j = 0; j < i; ++j) {
        const Flanker& o = g.flankers[j];
        if (!flanker_is_lines(o) || o.strokes.empty() || o.strokes.front().points.size() < 2) continue;
        const double d = distance(center, line_flanker_center(o));
        if (d < cfg.min_flanker_center_distance - kTol)
          raw.push_back({"flanker-center-distance", name + " center is " + fmt_num(d) + " px from flanker " +
                                                        std::to_string(j)});
      }
    } else if (f.curvy) {
      check_curvy(*f.curvy, cfg, cfg.curvy_flanker_diameter, name, raw);
    }
    for (const auto* main : {&g.main_closed, &g.main_open}) {
      const double d = stroke_distance(f.strokes, *main);
      if (d < cfg.min_flanker_contour_distance - kTol)
        raw.push_back({"flanker-contour-distance", name + " is " + fmt_num(d) + " px from the " +
                                                       (main == &g.main_closed ? "closed" : "open") +
                                                       " main contour"});
    }
  }

  // the same geometric fact found in both versions is reported once
  std::vector<Violation> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& v : raw)
    if (seen.insert({v.rule, v.detail}).second) out.push_back(std::move(v));
  return out;
}

std::vector<Violation> validate_geometry(const StimulusGeometry& g) {
  return validate_geometry(g, find_variant(g.variant_id));
}

std::vector<Violation> validate_pair(const StimulusPair& pair) {
  std::vector<Violation> out;
  const auto& o = pair.open;
  const auto& c = pair.closed;
  if (o.member != Member::Open || c.member != Member::Closed)
    out.push_back({"pair-members", "pair members are not tagged open/closed"});
  if (o.pair_id != c.pair_id || o.seed != c.seed || o.variant_id != c.variant_id)
    out.push_back({"pair-identity", "pair members disagree on pair_id, seed or variant"});
  if (o.flankers != c.flankers) out.push_back({"pair-flankers", "pair members have different flankers"});
  if (!(o.main_open == c.main_open) || !(o.main_closed == c.main_closed))
    out.push_back({"pair-main", "pair members have different main contours"});
  if (o.polygon) {
    // the polygon versions differ only in their first vertex
    const auto& op = o.main_open.points;
    const auto& cp = o.main_closed.points;
    if (op.size() != cp.size() || !std::equal(op.begin() + 1, op.end(), cp.begin() + 1))
      out.push_back({"pair-gap", "open and closed polygons differ outside the gap"});
  }
  return out;
}

}  // namespace contourlab
