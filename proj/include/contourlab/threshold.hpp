#pragma once

#include <span>
#include <vector>

namespace contourlab {

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::span<const double> values, double q);

/// `count` evenly spaced points spanning the [2.5, 97.5] percentile range.
std::vector<double> threshold_candidates(std::span<const double> logits, int count = 100);

/// Predicts label 1 where logit > threshold.
double accuracy_at(std::span<const double> logits, std::span<const int> labels, double threshold);

struct ThresholdResult {
  double threshold = 0.0;
  double accuracy = 0.0;
  /// Only one label present; the threshold sits beyond every logit.
  bool degenerate = false;
  /// A constant prediction beat every candidate in the percentile window.
  bool constant_prediction = false;
};

/// Best of the candidates above, ties to the one closest to 0. If predicting a
/// single label for everything scores strictly better, that threshold (max
/// logit, or min logit - 1) is returned instead.
ThresholdResult optimize_threshold(std::span<const double> logits, std::span<const int> labels);

}  // namespace contourlab
