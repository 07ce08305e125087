#include "contourlab/canvas.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"

namespace contourlab {

Canvas crop(const Canvas& src, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > src.width || y + h > src.height)
    throw UsageError("crop rectangle outside the canvas");
  Canvas out(w, h, src.channels);
  const std::size_t row = static_cast<std::size_t>(w) * src.channels;
  for (int r = 0; r < h; ++r)
    std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(src.index(x, y + r)), row,
                out.data.begin() + static_cast<std::ptrdiff_t>(out.index(0, r)));
  return out;
}

Canvas resize_bilinear(const Canvas& src, int w, int h) {
  if (w <= 0 || h <= 0) throw UsageError("resize target must be positive");
  if (w == src.width && h == src.height) return src;
  Canvas out(w, h, src.channels);
  const double sx = static_cast<double>(src.width) / w;
  const double sy = static_cast<double>(src.height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, src.height - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, src.width - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels; ++c) {
        const double top = src.at(x0, y0, c) * (1 - wx) + src.at(x1, y0, c) * wx;
        const double bottom = src.at(x0, y1, c) * (1 - wx) + src.at(x1, y1, c) * wx;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bottom * wy));
      }
    }
  }
  return out;
}

Canvas resize_center_crop(const Canvas& src, int resize, int crop_size) {
  Canvas resized = resize_bilinear(src, resize, resize);
  const int offset = (resize - crop_size) / 2;
  return crop(resized, offset, offset, crop_size, crop_size);
}

Canvas to_gray(const Canvas& src) {
  if (src.channels == 1) return src;
  Canvas out(src.width, src.height, 1);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x)
      out.at(x, y) = static_cast<std::uint8_t>(
          std::lround(0.299 * src.at(x, y, 0) + 0.587 * src.at(x, y, 1) + 0.114 * src.at(x, y, 2)));
  return out;
}

Canvas to_rgb(const Canvas& src) {
  if (src.channels == 3) return src;
  Canvas out(src.width, src.height, 3);
  for (std::size_t i = 0; i < src.data.size(); ++i)
    for (int c = 0; c < 3; ++c) out.data[i * 3 + static_cast<std::size_t>(c)] = src.data[i];
  return out;
}

Canvas add_margin(const Canvas& src, int margin, std::uint8_t value) {
  if (margin < 0) throw UsageError("margin must be >= 0");
  if (margin == 0) return src;
  Canvas out(src.width + 2 * margin, src.height + 2 * margin, src.channels, value);
  const std::size_t row = static_cast<std::size_t>(src.width) * src.channels;
  for (int r = 0; r < src.height; ++r)
    std::copy_n(src.data.begin() + static_cast<std::ptrdiff_t>(src.index(0, r)), row,
                out.data.begin() + static_cast<std::ptrdiff_t>(out.index(margin, r + margin)));
  return out;
}

double mean_intensity(const Canvas& c) {
  if (c.data.empty()) return 0.0;
  double sum = 0.0;
  for (auto v : c.data) sum += v;
  return sum / static_cast<double>(c.data.size());
}

}  // namespace contourlab
