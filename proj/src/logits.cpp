#include "contourlab/logits.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contourlab/error.hpp"

namespace contourlab {

Logit logit_of_prob(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw UsageError("probability outside [0, 1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (p == 0.0) return {-inf, true};
  if (p == 1.0) return {inf, true};
  return {std::log(p) - std::log1p(-p), false};
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sum_exp(std::span<const double> z) {
  if (z.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(z.begin(), z.end());
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> z) {
  const double lse = log_sum_exp(z);
  std::vector<double> p(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) p[i] = std::exp(z[i] - lse);
  return p;
}

void check_class_set(std::span<const int> class_set, int class_count, bool allow_full) {
  if (class_set.empty()) throw UsageError("empty class set");
  std::vector<bool> seen(static_cast<std::size_t>(std::max(class_count, 0)), false);
  for (int c : class_set) {
    if (c < 0 || c >= class_count)
      throw UsageError("class id " + std::to_string(c) + " outside [0, " + std::to_string(class_count) + ")");
    if (seen[c]) throw UsageError("duplicate class id " + std::to_string(c));
    seen[c] = true;
  }
  if (!allow_full && static_cast<int>(class_set.size()) == class_count)
    throw UsageError("class set covers every class");
}

namespace {

void split_scores(std::span<const double> z, std::span<const int> class_set, std::vector<double>& in,
                  std::vector<double>& out) {
  check_class_set(class_set, static_cast<int>(z.size()), true);
  std::vector<bool> member(z.size(), false);
  for (int c : class_set) member[c] = true;
  for (std::size_t i = 0; i < z.size(); ++i) (member[i] ? in : out).push_back(z[i]);
}

}  // namespace

double class_set_probability(std::span<const double> z, std::span<const int> class_set) {
  std::vector<double> in, out;
  split_scores(z, class_set, in, out);
  return std::exp(log_sum_exp(in) - log_sum_exp(z));
}

double joint_class_logit(std::span<const double> z, std::span<const int> class_set) {
  check_class_set(class_set, static_cast<int>(z.size()));
  std::vector<double> in, out;
  split_scores(z, class_set, in, out);
  return log_sum_exp(in) - log_sum_exp(out);
}

}  // namespace contourlab
