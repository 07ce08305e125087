#pragma once

#include <cstdint>
#include <vector>

#include "contourlab/canvas.hpp"
#include "contourlab/classifier.hpp"

namespace contourlab {

struct PixelPos {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPos&, const PixelPos&) = default;
};

struct EndpointOptions {
  int patch = 33;
  int stride = 8;
  /// Logit per endpoint inside a patch.
  double gain = 1.0;
  /// Line pixels differ from the background gray by more than this.
  int deviation = 59;
  /// Skeleton branches up to this many pixels that end in a junction are
  /// thinning artifacts (sharp corners leave long ones) and are removed.
  int spur_length = 24;
  /// Skeleton components smaller than this are ignored.
  int min_component = 8;
};

/// Row-major 0/1 mask of width*height.
struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  bool get(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height && bits[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v; }
  std::size_t count() const;
};

BinaryMask line_mask(const Canvas& image, int deviation = 59);
/// Zhang-Suen thinning followed by removal of staircase pixels.
BinaryMask thin(BinaryMask m);
int neighbor_count(const BinaryMask& m, int x, int y);
/// Skeleton pixels with exactly one 8-neighbor, after spur pruning.
std::vector<PixelPos> find_endpoints(const Canvas& image, const EndpointOptions& opts = {});
PatchLogitGrid endpoint_grid(const std::vector<PixelPos>& endpoints, int width, int height,
                             const EndpointOptions& opts = {});

/// Reference local-feature classifier: a patch's logit counts the free line
/// endpoints inside it and the image logit is the sum over patches. Positive
/// logits are evidence for an open contour (dataset label 0).
class EndpointDetector : public Classifier {
 public:
  explicit EndpointDetector(EndpointOptions opts = {});
  const ClassifierInfo& info() const override { return info_; }
  const EndpointOptions& options() const { return opts_; }

 protected:
  Scores do_classify(const Canvas& image) override;
  PatchLogitGrid do_patch_logits(const Canvas& image) override;

 private:
  ClassifierInfo info_;
  EndpointOptions opts_;
};

}  // namespace contourlab
