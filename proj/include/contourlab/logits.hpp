#pragma once

#include <span>
#include <vector>

namespace contourlab {

/// logit(p) = log(p / (1 - p)). At p = 0 or 1 the value is -inf or +inf and
/// `infinite` is set; p outside [0, 1] or NaN throws UsageError.
struct Logit {
  double value = 0.0;
  bool infinite = false;
};

Logit logit_of_prob(double p);
double sigmoid(double z);

double log_sum_exp(std::span<const double> z);
std::vector<double> softmax(std::span<const double> z);

/// Throws UsageError if the set is empty, has duplicates or ids outside
/// [0, class_count). `allow_full` permits the set of all classes.
void check_class_set(std::span<const int> class_set, int class_count, bool allow_full = false);

/// Sum of softmax probabilities over the set.
double class_set_probability(std::span<const double> z, std::span<const int> class_set);

/// log sum_{k in set} exp(z_k) - log sum_{i not in set} exp(z_i). Equal to
/// logit(class_set_probability) but stays finite when the probability rounds to 1.
double joint_class_logit(std::span<const double> z, std::span<const int> class_set);

}  // namespace contourlab
