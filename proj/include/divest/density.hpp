#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "divest/distributions.hpp"
#include "divest/rng.hpp"
#include "divest/spatial.hpp"

namespace divest {

/// k / (M * c_d * rho^d). Throws when rho == 0 (duplicate reference points).
double knn_density_value(std::size_t k, std::size_t m, std::size_t d, double rho);

/// Adaptive k-NN density estimate over M reference points.
class KnnDensityEstimator {
 public:
  KnnDensityEstimator(std::shared_ptr<const NeighborIndex> index, std::size_t k);

  double operator()(std::span<const double> x) const;

  std::size_t k() const { return k_; }
  std::size_t reference_size() const { return index_->size(); }
  std::size_t dim() const { return index_->dim(); }
  const NeighborIndex& index() const { return *index_; }

 private:
  std::shared_ptr<const NeighborIndex> index_;
  std::size_t k_;
};

double knn_density(const KnnDensityEstimator& est, std::span<const double> x);

enum class BandwidthRule {
  /// c_d h^d = k / M: the ball holds about k points where the density is 1.
  volume_matched,
  /// h = (k / M)^(1/d) taken literally as the ball radius.
  radius,
};

double kernel_bandwidth(std::size_t k, std::size_t m, std::size_t d, BandwidthRule rule);

/// Uniform-kernel density estimate whose kernel mass is renormalised by the
/// volume of the part of the ball inside the support box.
class TruncatedUniformKernelEstimator {
 public:
  static constexpr std::size_t kDefaultBallDraws = 10'000;

  TruncatedUniformKernelEstimator(std::shared_ptr<const NeighborIndex> index, double bandwidth,
                                  Box support, Seed ball_seed,
                                  std::size_t ball_draws = kDefaultBallDraws);

  /// Count within distance h divided by M * vol(B(x,h) intersected with box).
  /// Zero when no reference point is within h.
  double operator()(std::span<const double> x) const;

  /// Exact c_d h^d when the ball lies inside the box, otherwise a Monte Carlo
  /// estimate from a fixed set of uniform draws in the unit ball.
  double intersection_volume(std::span<const double> x) const;

  double bandwidth() const { return h_; }
  const Box& support() const { return box_; }

 private:
  std::shared_ptr<const NeighborIndex> index_;
  double h_;
  Box box_;
  double ball_volume_;
  std::vector<double> ball_points_;  // ball_draws x d, uniform in the unit ball
  std::size_t ball_draws_;
};

double kernel_density(const TruncatedUniformKernelEstimator& est, std::span<const double> x);

/// Uniform draws from the d-dimensional unit ball, row-major.
std::vector<double> unit_ball_draws(std::size_t d, std::size_t n, Seed seed);

}  // namespace divest
