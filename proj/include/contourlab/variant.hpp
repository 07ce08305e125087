#pragma once

#include <iosfwd>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "contourlab/geometry.hpp"

namespace contourlab {

/// Closed interval [lo, hi].
struct Range {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;

  bool contains(int v) const { return v >= lo && v <= hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class MainShape { Polygon, Curvy };
enum class Placement { RandomTranslate, Center, Anchors };
enum class FlankerKind { None, Lines, DashedClosedCurvy, OpenCurvy };
enum class LineColor { Black, White, BlackWhiteBlack };

/// Every sampling and styling parameter of one dataset configuration.
/// The defaults are the i.i.d. training configuration.
struct VariantConfig {
  std::string id = "iid";
  int number = 0;
  std::string description = "i.i.d. to training";

  MainShape main_shape = MainShape::Polygon;
  Placement placement = Placement::RandomTranslate;
  /// Candidate centers for Placement::Anchors, in frame pixels.
  std::vector<PointPx> anchors;

  // Polygon main contour.
  IntRange polygon_edges{3, 9};
  Range polygon_radius{0.0, 128.0};
  Range gap_distance{20.0, 50.0};
  double min_corner_edge_distance = 10.0;

  // Radial-frequency main contour.
  Range curvy_diameter{50.0, 100.0};
  Range curvy_amplitude{15.0, 45.0};
  IntRange curvy_frequency{1, 6};
  double curvy_open_angle = std::numbers::pi / 3.0;
  int curvy_samples = 720;
  double curvy_min_radius = 2.0;
  /// Upper bound on r(phi) for contours placed at anchors, keeping neighbours apart.
  double anchor_max_radius = 59.0;
  bool dashed_main = false;
  int dash_count = 20;
  double dash_angle = std::numbers::pi / 20.0;

  // Flankers.
  FlankerKind flanker_kind = FlankerKind::Lines;
  IntRange flanker_count{10, 25};
  Range segment_length{32.0, 64.0};
  bool asymmetric_flankers = false;
  Range short_segment_length{16.0, 32.0};
  double two_segment_probability = 0.5;
  double min_flanker_angle_deg = 45.0;
  double min_flanker_center_distance = 10.0;
  double min_flanker_contour_distance = 10.0;
  Range curvy_flanker_diameter{50.0, 50.0};

  // Line style.
  double line_width = 2.5;
  LineColor line_color = LineColor::Black;
  bool binarize = false;
  int binarize_threshold = 59;

  int frame_size = 256;
  int main_retry_budget = 1000;
  int flanker_retry_budget = 10000;

  friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

inline constexpr int kCatalogSchemaVersion = 1;

/// The i.i.d. configuration followed by variants 1..15.
const std::vector<VariantConfig>& variant_catalog();

/// Looks up by id ("iid", "v4") or bare number ("4"). Throws UsageError.
const VariantConfig& find_variant(std::string_view id);
const VariantConfig& find_variant(const std::vector<VariantConfig>& catalog, std::string_view id);

/// Key-value (INI) serialization of a catalog, one section per variant.
void write_catalog(std::ostream& out, const std::vector<VariantConfig>& catalog);
std::vector<VariantConfig> read_catalog(std::istream& in);
std::vector<VariantConfig> load_catalog_file(const std::string& path);

/// sha256 of the serialized single-variant section.
std::string config_hash(const VariantConfig& v);

std::string_view to_string(MainShape s);
std::string_view to_string(Placement p);
std::string_view to_string(FlankerKind k);
std::string_view to_string(LineColor c);

}  // namespace contourlab
