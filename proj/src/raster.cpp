#include "contourlab/raster.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"

namespace contourlab {

namespace {

/// Marks every pixel whose center lies within `radius` of a stroke segment.
void stamp_capsules(std::vector<std::uint8_t>& mask, int size, const std::vector<Polyline>& strokes,
                    double scale, double radius) {
  const double r2 = radius * radius;
  for (const auto& stroke : strokes) {
    for (std::size_t s = 0; s < stroke.segment_count(); ++s) {
      const Segment seg = stroke.segment(s);
      const double ax = seg.a.x * scale, ay = seg.a.y * scale;
      const double bx = seg.b.x * scale, by = seg.b.y * scale;
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min(ax, bx) - radius)));
      const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max(ax, bx) + radius)));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min(ay, by) - radius)));
      const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max(ay, by) + radius)));
      const double dx = bx - ax, dy = by - ay;
      const double len2 = dx * dx + dy * dy;
      for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
          const double px = x + 0.5;
          double t = len2 > 0 ? ((px - ax) * dx + (py - ay) * dy) / len2 : 0.0;
          t = std::clamp(t, 0.0, 1.0);
          const double ex = ax + t * dx - px, ey = ay + t * dy - py;
          if (ex * ex + ey * ey <= r2) mask[static_cast<std::size_t>(y) * size + x] = 1;
        }
      }
    }
  }
}

}  // namespace

LineStyle style_for(const VariantConfig& cfg) { return {cfg.line_width, cfg.line_color}; }

Canvas draw_supersampled(const std::vector<Polyline>& strokes, const LineStyle& style,
                         int supersample_factor, int final_size) {
  if (supersample_factor < 1) throw UsageError("supersample factor must be >= 1");
  if (style.width <= 0) throw UsageError("line width must be > 0");
  const int size = final_size * supersample_factor;
  const double scale = supersample_factor;
  Canvas big(size, size, 1, kBackgroundGray);
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(size) * size, 0);

  auto paint = [&](std::uint8_t value) {
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) big.data[i] = value;
  };

  const double outer = style.width * scale / 2.0;
  stamp_capsules(mask, size, strokes, scale, outer);
  switch (style.color) {
    case LineColor::Black: paint(0); break;
    case LineColor::White: paint(255); break;
    case LineColor::BlackWhiteBlack:
      paint(0);
      std::fill(mask.begin(), mask.end(), 0);
      stamp_capsules(mask, size, strokes, scale, outer / 3.0);
      paint(255);
      break;
  }
  return big;
}

Canvas downscale_box(const Canvas& src, int factor) {
  if (factor == 1) return src;
  if (src.width % factor || src.height % factor) throw UsageError("canvas not divisible by factor");
  Canvas out(src.width / factor, src.height / factor, src.channels);
  const int area = factor * factor;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < src.channels; ++c) {
        int sum = 0;
        for (int j = 0; j < factor; ++j)
          for (int i = 0; i < factor; ++i) sum += src.at(x * factor + i, y * factor + j, c);
        out.at(x, y, c) = static_cast<std::uint8_t>((sum + area / 2) / area);
      }
  return out;
}

Canvas binarize(const Canvas& c, std::uint8_t threshold) {
  Canvas out = c;
  for (auto& v : out.data) v = v < threshold ? 0 : kBackgroundGray;
  return out;
}

Canvas blend_background(const Canvas& c, const Canvas& bg, double contrast) {
  if (c.width != bg.width || c.height != bg.height)
    throw UsageError("background size " + std::to_string(bg.width) + "x" + std::to_string(bg.height) +
                     " does not match stimulus " + std::to_string(c.width) + "x" + std::to_string(c.height));
  if (contrast < 0.0 || contrast > 1.0) throw UsageError("contrast must be in [0, 1]");
  const int channels = std::max(c.channels, bg.channels);
  const Canvas lines = channels == 3 ? to_rgb(c) : c;
  const Canvas back = channels == 3 ? to_rgb(bg) : bg;
  Canvas out(c.width, c.height, channels);
  constexpr double gray = kBackgroundGray;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double b = gray + contrast * (back.data[i] - gray);
    const double s = lines.data[i];
    double coverage = 0.0;
    double ink = 0.0;
    if (s < gray) {
      coverage = (gray - s) / gray;
      ink = 0.0;
    } else if (s > gray) {
      coverage = (s - gray) / (255.0 - gray);
      ink = 255.0;
    }
    out.data[i] = static_cast<std::uint8_t>(std::lround((1.0 - coverage) * b + coverage * ink));
  }
  return out;
}

std::vector<Polyline> stimulus_strokes(const StimulusGeometry& g, const VariantConfig& cfg) {
  std::vector<Polyline> strokes = main_strokes(g, cfg);
  for (const auto& f : g.flankers) strokes.insert(strokes.end(), f.strokes.begin(), f.strokes.end());
  return strokes;
}

Canvas render(const StimulusGeometry& g, const VariantConfig& cfg, const LineStyle& style,
              const RenderConfig& rc) {
  const Canvas big = draw_supersampled(stimulus_strokes(g, cfg), style, rc.supersample_factor, rc.final_size);
  Canvas img = downscale_box(big, rc.supersample_factor);
  if (cfg.binarize) img = binarize(img, static_cast<std::uint8_t>(cfg.binarize_threshold));
  if (rc.background) img = blend_background(img, *rc.background, rc.contrast);
  return add_margin(img, rc.margin, 255);
}

Canvas render(const StimulusGeometry& g, const VariantConfig& cfg, const RenderConfig& rc) {
  return render(g, cfg, style_for(cfg), rc);
}

}  // namespace contourlab
