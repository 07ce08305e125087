#include "contourlab/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"

namespace contourlab {

PatchRect patch_rect(const PatchLogitGrid& g, int row, int col) {
  return {g.offset_x + col * g.stride, g.offset_y + row * g.stride, g.patch, g.patch};
}

std::vector<double> pixel_logits(const PatchLogitGrid& g, int width, int height) {
  std::vector<double> sum(static_cast<std::size_t>(width) * height, 0.0);
  std::vector<int> count(sum.size(), 0);
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const PatchRect p = patch_rect(g, r, c);
      const double v = g.at(r, c);
      for (int y = std::max(p.y, 0); y < std::min(p.y + p.h, height); ++y)
        for (int x = std::max(p.x, 0); x < std::min(p.x + p.w, width); ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * width + x;
          sum[i] += v;
          ++count[i];
        }
    }
  for (std::size_t i = 0; i < sum.size(); ++i)
    if (count[i]) sum[i] /= count[i];
  return sum;
}

Canvas heatmap(const PatchLogitGrid& g, int width, int height) {
  const auto v = pixel_logits(g, width, height);
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  Canvas out(width, height, 3, 255);
  if (scale == 0.0) return out;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double t = v[static_cast<std::size_t>(y) * width + x] / scale;
      const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::abs(t))));
      if (t > 0) {
        out.at(x, y, 1) = fade;
        out.at(x, y, 2) = fade;
      } else if (t < 0) {
        out.at(x, y, 0) = fade;
        out.at(x, y, 1) = fade;
      }
    }
  return out;
}

Canvas heatmap_overlay(const PatchLogitGrid& g, const Canvas& image, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw UsageError("overlay alpha outside [0, 1]");
  const Canvas map = heatmap(g, image.width, image.height);
  const Canvas base = to_rgb(image);
  Canvas out = base;
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * base.data[i] + alpha * map.data[i]));
  return out;
}

ExtremePatches top_extreme_patches(const PatchLogitGrid& g, int k, ExtremeSign sign) {
  if (k < 1) throw UsageError("k must be at least 1");
  auto key = [sign](double v) {
    switch (sign) {
      case ExtremeSign::Positive: return v;
      case ExtremeSign::Negative: return -v;
      case ExtremeSign::Absolute: return std::abs(v);
    }
    return 0.0;
  };
  std::vector<ExtremePatch> candidates;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c)
      if (key(g.at(r, c)) > 0.0) candidates.push_back({r, c, patch_rect(g, r, c), g.at(r, c)});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const ExtremePatch& a, const ExtremePatch& b) { return key(a.value) > key(b.value); });
  ExtremePatches out;
  for (const auto& cand : candidates) {
    if (static_cast<int>(out.patches.size()) == k) break;
    const bool clash = std::any_of(out.patches.begin(), out.patches.end(),
                                   [&](const ExtremePatch& p) { return p.rect.overlaps(cand.rect); });
    if (!clash) out.patches.push_back(cand);
  }
  out.fewer_than_requested = static_cast<int>(out.patches.size()) < k;
  return out;
}

}  // namespace contourlab
