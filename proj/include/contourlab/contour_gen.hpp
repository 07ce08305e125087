#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "contourlab/geometry.hpp"
#include "contourlab/rng.hpp"
#include "contourlab/variant.hpp"

namespace contourlab {

/// Sampled parameters of a polygon main contour. Coordinates are relative to
/// `center`; angle i carries radius i, and the open version adds a second
/// radius at `gap_angle_index`.
struct PolygonMainSpec {
  int n = 0;
  std::vector<double> angles;
  std::vector<double> radii;
  int gap_angle_index = 0;
  double gap_radius = 0.0;
  double gap_distance = 0.0;
  PointPx center;

  friend bool operator==(const PolygonMainSpec&, const PolygonMainSpec&) = default;
};

/// Radial-frequency contour: r(phi) = A1 sin(f1 (phi + t1)) + A2 sin(f2 (phi + t2)) + r_c.
struct CurvyParams {
  double base_radius = 0.0;
  double amplitude1 = 0.0;
  double amplitude2 = 0.0;
  int frequency1 = 1;
  int frequency2 = 1;
  double phase1 = 0.0;
  double phase2 = 0.0;
  /// Start of the removed segment in the open version.
  double open_phase = 0.0;
  PointPx center;

  friend bool operator==(const CurvyParams&, const CurvyParams&) = default;
};

struct MainContour {
  Polyline closed;
  Polyline open;
  std::optional<PolygonMainSpec> polygon;
  std::optional<CurvyParams> curvy;
  /// Index into VariantConfig::anchors when placed at an anchor.
  std::optional<int> anchor;
};

struct Flanker {
  FlankerKind kind = FlankerKind::Lines;
  /// Drawn strokes. Line flankers have one stroke of 2 or 3 points
  /// (1 or 2 segments sharing a vertex); dashed flankers have one stroke per dash.
  std::vector<Polyline> strokes;
  std::vector<double> segment_lengths;
  PointPx center;
  std::optional<CurvyParams> curvy;
  std::optional<int> anchor;

  friend bool operator==(const Flanker&, const Flanker&) = default;
};

enum class Member { Open, Closed };

struct StimulusGeometry {
  Polyline main_closed;
  Polyline main_open;
  std::vector<Flanker> flankers;
  std::optional<PolygonMainSpec> polygon;
  std::optional<CurvyParams> curvy;
  bool dashed_main = false;
  std::string variant_id;
  std::uint64_t pair_id = 0;
  std::uint64_t seed = 0;
  Member member = Member::Closed;
};

struct StimulusPair {
  StimulusGeometry open;
  StimulusGeometry closed;
};

struct Violation {
  std::string rule;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Polygon main contour

PolygonMainSpec sample_polygon_spec(Rng& rng, int n, const VariantConfig& cfg);
Polyline polygon_closed(const PolygonMainSpec& spec);
Polyline polygon_open(const PolygonMainSpec& spec);

/// Rejection-samples a polygon and its open twin, placed uniformly inside the
/// frame. Throws ConstraintError when the retry budget is exhausted.
MainContour sample_polygon_main(Rng& rng, int n, const VariantConfig& cfg);

/// Corner-to-non-adjacent-edge and edge-crossing rules for one polyline.
std::vector<Violation> polygon_shape_violations(const Polyline& p, double min_corner_edge_distance);

// ---------------------------------------------------------------------------
// Radial-frequency contours

double eval_curvy_radius(const CurvyParams& params, double phi);
PointPx curvy_point(const CurvyParams& params, double phi);

/// Arc from phi_begin to phi_end (phi_end > phi_begin) at `samples_per_circle`
/// angular resolution; both end angles are exact vertices.
Polyline curvy_arc(const CurvyParams& params, double phi_begin, double phi_end,
                   int samples_per_circle);
Polyline closed_curvy(const CurvyParams& params, int samples_per_circle = 720);
/// Removes the segment [open_phase, open_phase + open_angle).
Polyline open_curvy(const CurvyParams& params, double open_angle = std::numbers::pi / 3.0,
                    int samples_per_circle = 720);

/// Angular intervals [begin, end) left visible by the dash mask and the
/// optional open-segment removal. Intervals are expressed on [0, 2pi) phase,
/// possibly with end > 2pi for the one wrapping interval.
struct PhaseInterval {
  double begin = 0.0;
  double end = 0.0;
};
std::vector<PhaseInterval> dash_intervals(int dash_count, double dash_angle);
std::vector<PhaseInterval> subtract_interval(const std::vector<PhaseInterval>& visible,
                                             PhaseInterval removed);

/// Closed contour with `dash_count` equally spaced masked segments of `dash_angle` each.
std::vector<Polyline> dash_contour(const CurvyParams& params, int dash_count = 20,
                                   double dash_angle = std::numbers::pi / 20.0,
                                   int samples_per_circle = 720);
/// Open contour first, then the dash mask.
std::vector<Polyline> dash_open_contour(const CurvyParams& params, double open_angle,
                                        int dash_count, double dash_angle,
                                        int samples_per_circle = 720);

/// Samples amplitudes, frequencies and phases for a contour of the given diameter
/// range at `center`, rejecting draws whose radius drops below `min_radius` or
/// exceeds `max_radius`.
CurvyParams sample_curvy_params(Rng& rng, const VariantConfig& cfg, Range diameter,
                                PointPx center, double max_radius);

MainContour sample_curvy_main(Rng& rng, const VariantConfig& cfg);

// ---------------------------------------------------------------------------
// Flankers and pairs

std::vector<Flanker> sample_flankers(Rng& rng, const MainContour& main, const VariantConfig& cfg);

/// Strokes of the main contour as drawn for `member` (dash arcs for dashed mains).
std::vector<Polyline> main_strokes(const StimulusGeometry& g, const VariantConfig& cfg);

StimulusPair generate_pair(std::uint64_t master_seed, const VariantConfig& cfg, std::uint64_t index);

/// All constraint violations of `g` under `cfg`; empty iff valid.
std::vector<Violation> validate_geometry(const StimulusGeometry& g, const VariantConfig& cfg);
/// Looks up the configuration by g.variant_id in the built-in catalog.
std::vector<Violation> validate_geometry(const StimulusGeometry& g);

/// Pair-level rules: shared flankers, ids, and identical geometry apart from openness.
std::vector<Violation> validate_pair(const StimulusPair& pair);

}  // namespace contourlab
