#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contourlab/canvas.hpp"

namespace contourlab {

struct ClassifierInfo {
  std::string name;
  bool scores = false;
  bool patch_logits = false;
  /// 1 means a binary classifier returning a single logit z, p = sigmoid(z).
  int class_count = 0;
  /// Binary classifiers only: which dataset label (0 open, 1 closed) a
  /// positive logit stands for. Absent means 1.
  std::optional<int> positive_label;
  /// Safe to call from several threads at once.
  bool thread_safe = false;
};

struct Scores {
  std::vector<double> z;
};

/// H x W patch logits. Patch (r, c) covers image pixels
/// [offset_x + c*stride, +patch) x [offset_y + r*stride, +patch).
struct PatchLogitGrid {
  int rows = 0;
  int cols = 0;
  int patch = 33;
  int stride = 8;
  int offset_x = 0;
  int offset_y = 0;
  std::vector<double> values;

  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double sum() const;
};

/// Patches needed to cover `extent` pixels; the last one may overhang.
int grid_extent(int extent, int patch, int stride);
/// Throws ProtocolError unless the grid is well formed for an image of
/// width x height (dims match grid_extent, or the no-overhang count).
void check_grid(const PatchLogitGrid& g, int width, int height);

/// Requests outside the declared capabilities are rejected before reaching
/// the implementation; responses are checked for length and finiteness.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual const ClassifierInfo& info() const = 0;

  Scores classify(const Canvas& image);
  PatchLogitGrid patch_logits(const Canvas& image);
  /// Several images at once: pipelined for remote classifiers, threaded
  /// (up to `jobs`) for thread-safe local ones. Output order = input order.
  std::vector<Scores> classify_batch(std::span<const Canvas> images, int jobs = 1);

 protected:
  virtual Scores do_classify(const Canvas& image) = 0;
  virtual PatchLogitGrid do_patch_logits(const Canvas& image);
  virtual std::vector<Scores> do_classify_batch(std::span<const Canvas> images, int jobs);

 private:
  void check_scores(const Scores& s) const;
};

/// Probability of a class set and its joint logit from one image's scores.
/// Binary classifiers accept class sets {0} (the positive class) only.
struct ClassSetScore {
  double probability = 0.0;
  double logit = 0.0;
};
ClassSetScore score_class_set(const ClassifierInfo& info, const Scores& s, std::span<const int> class_set);

/// Always returns the same scores (zero by default): a chance-level reference.
class ConstantClassifier : public Classifier {
 public:
  explicit ConstantClassifier(int class_count = 1, double value = 0.0);
  const ClassifierInfo& info() const override { return info_; }

 protected:
  Scores do_classify(const Canvas& image) override;

 private:
  ClassifierInfo info_;
  double value_;
};

/// Opens a classifier from a spec string:
///   builtin:endpoint | builtin:constant | exec:<shell command> |
///   tcp:<host>:<port> | unix:<socket path>
std::unique_ptr<Classifier> open_classifier(const std::string& spec, double timeout_s = 30.0);

}  // namespace contourlab
