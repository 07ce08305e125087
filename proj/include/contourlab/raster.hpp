#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "contourlab/canvas.hpp"
#include "contourlab/contour_gen.hpp"
#include "contourlab/variant.hpp"

namespace contourlab {

inline constexpr std::uint8_t kBackgroundGray = 118;
inline constexpr std::uint8_t kDefaultBinarizeThreshold = 59;

struct LineStyle {
  /// Final-image width in pixels. Black-white-black uses three equal bands.
  double width = 2.5;
  LineColor color = LineColor::Black;
};

struct RenderConfig {
  int supersample_factor = 4;
  int final_size = 256;
  /// White border added around the stimulus (16 px for the psychophysics displays).
  int margin = 0;
  /// Optional background blended at `contrast`; must match the final size.
  std::optional<Canvas> background;
  double contrast = 0.0;
};

LineStyle style_for(const VariantConfig& cfg);

/// Draws strokes as round-capped thick lines on a uniform gray canvas at
/// `supersample_factor` times the final resolution.
Canvas draw_supersampled(const std::vector<Polyline>& strokes, const LineStyle& style,
                         int supersample_factor, int final_size);

/// Exact block average over factor x factor blocks (rounded to nearest).
Canvas downscale_box(const Canvas& src, int factor);

/// Maps each pixel to 0 (below threshold) or the background gray.
Canvas binarize(const Canvas& c, std::uint8_t threshold = kDefaultBinarizeThreshold);

/// Rescales `bg` toward gray 118 by `contrast`, then composites the line
/// drawing over it using each pixel's deviation from gray as ink coverage.
Canvas blend_background(const Canvas& c, const Canvas& bg, double contrast);

/// All strokes (main contour for g.member, then flankers) of a stimulus.
std::vector<Polyline> stimulus_strokes(const StimulusGeometry& g, const VariantConfig& cfg);

Canvas render(const StimulusGeometry& g, const VariantConfig& cfg, const LineStyle& style,
              const RenderConfig& rc);
/// Renders with the variant's own style (including binarization).
Canvas render(const StimulusGeometry& g, const VariantConfig& cfg, const RenderConfig& rc = {});

}  // namespace contourlab
