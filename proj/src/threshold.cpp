#include "contourlab/threshold.hpp"

#include <algorithm>
#include <cmath>

#include "contourlab/error.hpp"

namespace contourlab {

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw UsageError("percentile of an empty list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = q / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + (v[hi] - v[lo]) * frac;
}

std::vector<double> threshold_candidates(std::span<const double> logits, int count) {
  const double lo = percentile(logits, 2.5);
  const double hi = percentile(logits, 97.5);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (count - 1);
  return out;
}

double accuracy_at(std::span<const double> logits, std::span<const int> labels, double threshold) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.size(); ++i)
    if ((logits[i] > threshold ? 1 : 0) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(logits.size());
}

ThresholdResult optimize_threshold(std::span<const double> logits, std::span<const int> labels) {
  if (logits.size() != labels.size()) throw UsageError("logits and labels differ in length");
  if (logits.empty()) throw UsageError("no samples to calibrate on");
  for (double z : logits)
    if (!std::isfinite(z)) throw UsageError("non-finite logit");
  const double lo = *std::min_element(logits.begin(), logits.end());
  const double hi = *std::max_element(logits.begin(), logits.end());

  const std::size_t ones = std::count(labels.begin(), labels.end(), 1);
  if (ones == 0) return {hi, 1.0, true, true};
  if (ones == labels.size()) return {lo - 1.0, 1.0, true, true};

  ThresholdResult best;
  bool have = false;
  for (double t : threshold_candidates(logits)) {
    const double acc = accuracy_at(logits, labels, t);
    if (!have || acc > best.accuracy || (acc == best.accuracy && std::abs(t) < std::abs(best.threshold))) {
      best = {t, acc, false, false};
      have = true;
    }
  }
  for (double t : {hi, lo - 1.0}) {
    const double acc = accuracy_at(logits, labels, t);
    if (acc > best.accuracy) best = {t, acc, false, true};
  }
  return best;
}

}  // namespace contourlab
