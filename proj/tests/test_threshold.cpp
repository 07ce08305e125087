#include "doctest.h"

#include <algorithm>
#include <vector>

#include "contourlab/rng.hpp"
#include "contourlab/threshold.hpp"

using namespace contourlab;

// Reference values: tests/oracles/threshold.py (numpy)

TEST_CASE("percentiles and candidate grid match numpy") {
  const std::vector<double> v{3.0, -1.0, 7.5, 2.0, 0.0, -4.0, 10.0, 5.5};
  CHECK(percentile(v, 2.5) == doctest::Approx(-3.475).epsilon(1e-14));
  CHECK(percentile(v, 50) == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(percentile(v, 97.5) == doctest::Approx(9.5625).epsilon(1e-14));
  const auto grid = threshold_candidates(v);
  REQUIRE(grid.size() == 100);
  CHECK(grid[0] == doctest::Approx(-3.475).epsilon(1e-14));
  CHECK(grid[1] == doctest::Approx(-3.343308080808081).epsilon(1e-14));
  CHECK(grid[99] == doctest::Approx(9.5625).epsilon(1e-14));
}

TEST_CASE("accuracy predicts closed strictly above the threshold") {
  const std::vector<double> z{-1, 0, 1};
  const std::vector<int> y{0, 0, 1};
  CHECK(accuracy_at(z, y, 0.0) == 1.0);
  CHECK(accuracy_at(z, y, -0.5) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("overlapping data reaches the exhaustive optimum") {
  const std::vector<double> z{-2.0, -1.5, -0.5, 0.2, 0.4, 1.0, 1.1, 2.5, -0.1, 0.8, 3.0, -3.0};
  const std::vector<int> y{0, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0};
  const auto r = optimize_threshold(z, y);
  CHECK(r.accuracy == doctest::Approx(0.8333333333333334));
  CHECK(accuracy_at(z, y, r.threshold) == r.accuracy);
}

TEST_CASE("separable data scores 1") {
  Rng rng(3);
  std::vector<double> z;
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) {
    const int label = i % 2;
    z.push_back(label ? rng.uniform(0.5, 4.0) : rng.uniform(-4.0, 0.3));
    y.push_back(label);
  }
  const auto r = optimize_threshold(z, y);
  CHECK(r.accuracy == 1.0);
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("single-label data is degenerate") {
  const std::vector<double> z{0.1, 0.5, 2.0};
  const std::vector<int> zeros{0, 0, 0}, ones{1, 1, 1};
  const auto a = optimize_threshold(z, zeros);
  CHECK(a.degenerate);
  CHECK(a.accuracy == 1.0);
  CHECK(a.threshold == 2.0);
  const auto b = optimize_threshold(z, ones);
  CHECK(b.degenerate);
  CHECK(b.threshold == doctest::Approx(-0.9));
}

TEST_CASE("ties go to the threshold closest to zero") {
  // every candidate in (-1, 1) separates the data
  std::vector<double> z;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    z.push_back(-1.0 - i * 0.01);
    y.push_back(0);
    z.push_back(1.0 + i * 0.01);
    y.push_back(1);
  }
  const auto r = optimize_threshold(z, y);
  CHECK(r.accuracy == 1.0);
  const auto grid = threshold_candidates(z);
  double closest = grid[0];
  for (double t : grid)
    if (accuracy_at(z, y, t) == 1.0 && std::abs(t) < std::abs(closest)) closest = t;
  CHECK(r.threshold == closest);
}

TEST_CASE("optimizer is within one grid step of the exhaustive oracle") {
  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> z;
    std::vector<int> y;
    const double shift = rng.uniform(0.0, 2.0);
    for (int i = 0; i < 150; ++i) {
      const int label = static_cast<int>(rng.uniform_int(0, 1));
      z.push_back(rng.uniform(-2, 2) + (label ? shift : 0.0));
      y.push_back(label);
    }
    // exhaustive scan over all midpoints
    std::vector<double> s = z;
    std::sort(s.begin(), s.end());
    double best = accuracy_at(z, y, s.front() - 1), best_t = s.front() - 1;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double m = (s[i] + s[i + 1]) / 2;
      if (accuracy_at(z, y, m) > best) best = accuracy_at(z, y, m), best_t = m;
    }
    if (accuracy_at(z, y, s.back()) > best) best = accuracy_at(z, y, s.back()), best_t = s.back();

    const auto grid = threshold_candidates(z);
    const double step = grid[1] - grid[0];
    std::size_t near = 0;
    for (double v : z) near += std::abs(v - best_t) <= step;
    const auto r = optimize_threshold(z, y);
    REQUIRE(r.accuracy <= best + 1e-12);
    REQUIRE(r.accuracy >= best - static_cast<double>(near) / z.size() - 1e-12);
  }
}
