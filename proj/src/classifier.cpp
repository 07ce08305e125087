#include "contourlab/classifier.hpp"

#include <cmath>

#include "contourlab/endpoint_detector.hpp"
#include "contourlab/error.hpp"
#include "contourlab/logits.hpp"
#include "contourlab/parallel.hpp"
#include "contourlab/protocol.hpp"

namespace contourlab {

double PatchLogitGrid::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

int grid_extent(int extent, int patch, int stride) {
  if (extent <= patch) return 1;
  return (extent - patch + stride - 1) / stride + 1;
}

void check_grid(const PatchLogitGrid& g, int width, int height) {
  if (g.patch < 1 || g.stride < 1) throw ProtocolError("grid patch and stride must be positive");
  if (g.rows < 1 || g.cols < 1) throw ProtocolError("empty patch grid");
  if (g.values.size() != static_cast<std::size_t>(g.rows) * g.cols)
    throw ProtocolError("grid has " + std::to_string(g.values.size()) + " values for " + std::to_string(g.rows) +
                        "x" + std::to_string(g.cols));
  auto fits = [&](int n, int extent, int offset) {
    const int covered = extent - offset;
    const int exact = covered >= g.patch ? (covered - g.patch) / g.stride + 1 : 1;
    return n == exact || n == grid_extent(covered, g.patch, g.stride);
  };
  if (!fits(g.rows, height, g.offset_y) || !fits(g.cols, width, g.offset_x))
    throw ProtocolError("grid dimensions do not match the image size, patch and stride");
  for (double v : g.values)
    if (!std::isfinite(v)) throw ProtocolError("non-finite patch logit");
}

void Classifier::check_scores(const Scores& s) const {
  if (static_cast<int>(s.z.size()) != info().class_count)
    throw ProtocolError(info().name + ": expected " + std::to_string(info().class_count) + " scores, got " +
                        std::to_string(s.z.size()));
  for (double v : s.z)
    if (!std::isfinite(v)) throw ProtocolError(info().name + ": non-finite score");
}

Scores Classifier::classify(const Canvas& image) {
  if (!info().scores) throw UsageError(info().name + " does not provide whole-image scores");
  Scores s = do_classify(image);
  check_scores(s);
  return s;
}

PatchLogitGrid Classifier::patch_logits(const Canvas& image) {
  if (!info().patch_logits) throw UsageError(info().name + " does not provide patch logits");
  PatchLogitGrid g = do_patch_logits(image);
  check_grid(g, image.width, image.height);
  return g;
}

std::vector<Scores> Classifier::classify_batch(std::span<const Canvas> images, int jobs) {
  if (!info().scores) throw UsageError(info().name + " does not provide whole-image scores");
  auto out = do_classify_batch(images, jobs);
  if (out.size() != images.size()) throw ProtocolError(info().name + ": batch size mismatch");
  for (const auto& s : out) check_scores(s);
  return out;
}

PatchLogitGrid Classifier::do_patch_logits(const Canvas&) {
  throw UsageError(info().name + " does not provide patch logits");
}

std::vector<Scores> Classifier::do_classify_batch(std::span<const Canvas> images, int jobs) {
  std::vector<Scores> out(images.size());
  parallel_for(images.size(), info().thread_safe ? jobs : 1, [&](std::size_t i) { out[i] = do_classify(images[i]); });
  return out;
}

ClassSetScore score_class_set(const ClassifierInfo& info, const Scores& s, std::span<const int> class_set) {
  if (info.class_count == 1) {
    if (class_set.size() != 1 || class_set[0] != 0)
      throw UsageError("a binary classifier only knows class set {0}");
    return {sigmoid(s.z.at(0)), s.z.at(0)};
  }
  check_class_set(class_set, info.class_count);
  return {class_set_probability(s.z, class_set), joint_class_logit(s.z, class_set)};
}

ConstantClassifier::ConstantClassifier(int class_count, double value) : value_(value) {
  if (class_count < 1) throw UsageError("class_count must be at least 1");
  info_.name = "constant";
  info_.scores = true;
  info_.class_count = class_count;
  info_.thread_safe = true;
}

Scores ConstantClassifier::do_classify(const Canvas&) {
  return {std::vector<double>(static_cast<std::size_t>(info_.class_count), value_)};
}

std::unique_ptr<Classifier> open_classifier(const std::string& spec, double timeout_s) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "builtin") {
    if (rest == "endpoint") return std::make_unique<EndpointDetector>();
    if (rest == "constant") return std::make_unique<ConstantClassifier>();
    throw UsageError("unknown builtin classifier '" + rest + "' (endpoint, constant)");
  }
  if (kind == "exec" || kind == "tcp" || kind == "unix") {
    if (rest.empty()) throw UsageError("classifier spec '" + spec + "' lacks an address");
    return connect_remote(kind, rest, timeout_s);
  }
  throw UsageError("unknown classifier spec '" + spec + "' (builtin:, exec:, tcp:, unix:)");
}

}  // namespace contourlab
