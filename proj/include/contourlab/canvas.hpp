#pragma once

#include <cstdint>
#include <vector>

namespace contourlab {

/// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Canvas {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Canvas() = default;
  Canvas(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  bool valid() const {
    return width >= 0 && height >= 0 && (channels == 1 || channels == 3) &&
           data.size() == static_cast<std::size_t>(width) * height * channels;
  }
  bool empty() const { return data.empty(); }

  friend bool operator==(const Canvas&, const Canvas&) = default;
};

/// Integer-aligned crop; the rectangle must lie inside the canvas.
Canvas crop(const Canvas& src, int x, int y, int w, int h);
/// Bilinear resampling with pixel-center alignment.
Canvas resize_bilinear(const Canvas& src, int w, int h);
/// Resize to `resize` x `resize`, then crop the central `crop` x `crop` square.
Canvas resize_center_crop(const Canvas& src, int resize, int crop);
Canvas to_gray(const Canvas& src);
Canvas to_rgb(const Canvas& src);
Canvas add_margin(const Canvas& src, int margin, std::uint8_t value = 255);
double mean_intensity(const Canvas& c);

}  // namespace contourlab
