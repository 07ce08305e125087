#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "contourlab/error.hpp"
#include "contourlab/logits.hpp"
#include "contourlab/rng.hpp"

using namespace contourlab;

// Reference values: tests/oracles/logits.py

TEST_CASE("logit of a probability") {
  CHECK(logit_of_prob(0.5).value == 0.0);
  CHECK(std::abs(logit_of_prob(0.9999).value - 9.2102403669758493777) < 1e-9);
  CHECK(std::abs(logit_of_prob(0.9).value - 2.1972245773362193828) < 1e-12);
  CHECK(std::abs(logit_of_prob(0.2).value - -1.3862943611198906188) < 1e-12);
  const auto one = logit_of_prob(1.0);
  CHECK(one.infinite);
  CHECK(one.value == std::numeric_limits<double>::infinity());
  const auto zero = logit_of_prob(0.0);
  CHECK(zero.infinite);
  CHECK(zero.value == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(logit_of_prob(1.5), UsageError);
  CHECK_THROWS_AS(logit_of_prob(-0.1), UsageError);
  CHECK_THROWS_AS(logit_of_prob(std::nan("")), UsageError);
}

TEST_CASE("sigmoid is stable and inverts the logit") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(sigmoid(-800.0) == 0.0);
  CHECK(sigmoid(-800.0) >= 0.0);
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double p = 1e-9 + (1 - 2e-9) * rng.uniform();
    REQUIRE(std::abs(sigmoid(logit_of_prob(p).value) - p) < 1e-12);
  }
}

TEST_CASE("log-sum-exp and softmax") {
  const std::vector<double> z{1000.0, 1000.0};
  CHECK(log_sum_exp(z) == doctest::Approx(1000.0 + std::log(2.0)));
  const auto p = softmax(z);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
  const std::vector<double> w{-3, 0, 2, 7};
  double total = 0.0;
  for (double v : softmax(w)) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("joint class logit of uniform scores is log(k/(N-k))") {
  const std::vector<double> z(1000, 0.37);
  const std::vector<int> one{17};
  const std::vector<int> three{1, 500, 999};
  CHECK(std::abs(joint_class_logit(z, one) - -6.9067547786485535186) < 1e-12);
  CHECK(std::abs(joint_class_logit(z, three) - -5.8061384812937286388) < 1e-12);
}

TEST_CASE("joint class logit stays finite when the probability saturates") {
  std::vector<double> z(1000, 0.0);
  z[0] = 100.0;
  const std::vector<int> set{0};
  CHECK(class_set_probability(z, set) == 1.0);
  CHECK(logit_of_prob(class_set_probability(z, set)).infinite);
  CHECK(std::abs(joint_class_logit(z, set) - 93.093245221351446481) < 1e-12);
}

TEST_CASE("joint class logit agrees with logit of the pooled probability") {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> z(1000);
    for (auto& v : z) v = rng.uniform(-30, 30);
    std::vector<int> set;
    const int k = 1 + static_cast<int>(rng.uniform_int(0, 5));
    while (static_cast<int>(set.size()) < k) {
      const int c = static_cast<int>(rng.uniform_int(0, 999));
      if (std::find(set.begin(), set.end(), c) == set.end()) set.push_back(c);
    }
    const double p = class_set_probability(z, set);
    REQUIRE(std::abs(joint_class_logit(z, set) - logit_of_prob(p).value) < 1e-9);
  }
}

TEST_CASE("class set validation") {
  const std::vector<int> empty, dup{1, 1}, out{1000}, full{0, 1};
  CHECK_THROWS_AS(check_class_set(empty, 1000), UsageError);
  CHECK_THROWS_AS(check_class_set(dup, 1000), UsageError);
  CHECK_THROWS_AS(check_class_set(out, 1000), UsageError);
  CHECK_THROWS_AS(check_class_set(full, 2), UsageError);
  CHECK_NOTHROW(check_class_set(full, 2, true));
}
