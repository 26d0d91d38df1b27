#include <cmath>
#include <memory>

#include "divest/density.hpp"
#include "divest/error.hpp"
#include "doctest.h"

using namespace divest;

TEST_CASE("k-NN density value") {
  CHECK(knn_density_value(1, 1, 1, 0.5) == doctest::Approx(1.0));  // 1 / (1 * 2 * 0.5)
  CHECK(knn_density_value(2, 10, 2, 1.0) == doctest::Approx(2.0 / (10 * M_PI)));
  CHECK_THROWS_AS(knn_density_value(1, 10, 2, 0.0), Error);
}

TEST_CASE("k-NN estimator on a grid") {
  std::vector<double> v;
  for (int i = 0; i < 100; ++i) v.push_back((i + 0.5) / 100.0);
  auto idx = std::make_shared<const NeighborIndex>(SampleSet(1, v));
  KnnDensityEstimator est(idx, 10);
  std::vector<double> q{0.5};
  CHECK(knn_density(est, q) == doctest::Approx(1.0).epsilon(0.1));
  CHECK_THROWS_AS(KnnDensityEstimator(idx, 101), Error);
}

TEST_CASE("bandwidth rules") {
  CHECK(kernel_bandwidth(10, 1000, 2, BandwidthRule::radius) == doctest::Approx(0.1));
  double h = kernel_bandwidth(10, 1000, 2, BandwidthRule::volume_matched);
  CHECK(M_PI * h * h == doctest::Approx(0.01));
  CHECK_THROWS_AS(kernel_bandwidth(0, 10, 2, BandwidthRule::radius), Error);
}

TEST_CASE("truncated kernel: point mass at the query") {
  auto idx = std::make_shared<const NeighborIndex>(SampleSet(2, {0.5, 0.5}));
  TruncatedUniformKernelEstimator interior(idx, 0.1, Box::cube(2, 0, 1), Seed{1, 4});
  std::vector<double> q{0.5, 0.5};
  CHECK(kernel_density(interior, q) == doctest::Approx(1.0 / (M_PI * 0.01)));

  auto corner_idx = std::make_shared<const NeighborIndex>(SampleSet(2, {0.0, 0.0}));
  TruncatedUniformKernelEstimator corner(corner_idx, 0.2, Box::cube(2, 0, 1), Seed{1, 4});
  std::vector<double> c{0.0, 0.0};
  // A quarter of the ball lies in the box.
  CHECK(corner.intersection_volume(c) == doctest::Approx(M_PI * 0.04 / 4).epsilon(0.03));
  CHECK(kernel_density(corner, c) == doctest::Approx(1.0 / corner.intersection_volume(c)));
}

TEST_CASE("truncated kernel: empty ball is zero, outside the box is an error") {
  auto idx = std::make_shared<const NeighborIndex>(SampleSet(1, {0.9}));
  TruncatedUniformKernelEstimator est(idx, 0.05, Box::cube(1, 0, 1), Seed{1, 4});
  std::vector<double> q{0.1}, out{1.5};
  CHECK(kernel_density(est, q) == 0.0);
  CHECK_THROWS_AS(kernel_density(est, out), Error);
}

TEST_CASE("unit ball draws lie in the ball") {
  auto p = unit_ball_draws(3, 2000, Seed{2, 4});
  for (std::size_t i = 0; i < 2000; ++i) {
    double r2 = p[3 * i] * p[3 * i] + p[3 * i + 1] * p[3 * i + 1] + p[3 * i + 2] * p[3 * i + 2];
    CHECK(r2 <= 1.0);
  }
}
