#pragma once

#include <vector>

#include "contourlab/canvas.hpp"
#include "contourlab/classifier.hpp"

namespace contourlab {

struct PatchRect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  /// Half-open pixel rectangles; touching edges do not overlap.
  bool overlaps(const PatchRect& o) const {
    return x < o.x + o.w && o.x < x + w && y < o.y + o.h && o.y < y + h;
  }
  friend bool operator==(const PatchRect&, const PatchRect&) = default;
};

PatchRect patch_rect(const PatchLogitGrid& g, int row, int col);

/// Mean logit of the patches covering each pixel (0 where none does).
std::vector<double> pixel_logits(const PatchLogitGrid& g, int width, int height);

/// RGB map: red for positive (open evidence), blue for negative (closed
/// evidence), white at 0, scaled by the largest |logit|.
Canvas heatmap(const PatchLogitGrid& g, int width, int height);
/// The map blended over `image` at `alpha`.
Canvas heatmap_overlay(const PatchLogitGrid& g, const Canvas& image, double alpha = 0.5);

enum class ExtremeSign { Positive, Negative, Absolute };

struct ExtremePatch {
  int row = 0;
  int col = 0;
  PatchRect rect;
  double value = 0.0;
};

struct ExtremePatches {
  std::vector<ExtremePatch> patches;
  /// Fewer than k non-overlapping patches with a nonzero value of the requested sign.
  bool fewer_than_requested = false;
};

/// Greedy: strongest patch first, skipping any that overlaps one already taken.
/// Ties go to the earlier patch in row-major order.
ExtremePatches top_extreme_patches(const PatchLogitGrid& g, int k, ExtremeSign sign = ExtremeSign::Absolute);

}  // namespace contourlab
