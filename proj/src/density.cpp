#include "divest/density.hpp"

#include <cmath>
#include <sstream>

#include "divest/error.hpp"

namespace divest {

double knn_density_value(std::size_t k, std::size_t m, std::size_t d, double rho) {
  if (!(rho > 0.0)) {
    std::ostringstream os;
    os << "knn_density: distance to the " << k << "-th neighbour is zero; the reference set holds "
       << "at least " << k << " duplicates of the query point";
    throw Error(os.str());
  }
  return static_cast<double>(k) /
         (static_cast<double>(m) * unit_ball_volume(d) * std::pow(rho, static_cast<double>(d)));
}

KnnDensityEstimator::KnnDensityEstimator(std::shared_ptr<const NeighborIndex> index, std::size_t k)
    : index_(std::move(index)), k_(k) {
  if (!index_) throw Error("KnnDensityEstimator: null index");
  if (k_ == 0 || k_ > index_->size())
    throw Error("KnnDensityEstimator: need 1 <= k <= M (k=" + std::to_string(k_) +
                ", M=" + std::to_string(index_->size()) + ")");
}

double KnnDensityEstimator::operator()(std::span<const double> x) const {
  double rho = index_->kth_distance(x, k_);
  return knn_density_value(k_, index_->size(), index_->dim(), rho);
}

double knn_density(const KnnDensityEstimator& est, std::span<const double> x) { return est(x); }

double kernel_bandwidth(std::size_t k, std::size_t m, std::size_t d, BandwidthRule rule) {
  if (k == 0 || m == 0 || k > m) throw Error("kernel_bandwidth: need 1 <= k <= M");
  double frac = static_cast<double>(k) / static_cast<double>(m);
  if (rule == BandwidthRule::volume_matched) frac /= unit_ball_volume(d);
  return std::pow(frac, 1.0 / static_cast<double>(d));
}

std::vector<double> unit_ball_draws(std::size_t d, std::size_t n, Seed seed) {
  Rng rng(seed);
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    double* p = out.data() + i * d;
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        p[j] = rng.normal();
        norm2 += p[j] * p[j];
      }
    } while (norm2 == 0.0);
    double r = std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(norm2);
    for (std::size_t j = 0; j < d; ++j) p[j] *= r;
  }
  return out;
}

TruncatedUniformKernelEstimator::TruncatedUniformKernelEstimator(
    std::shared_ptr<const NeighborIndex> index, double bandwidth, Box support, Seed ball_seed,
    std::size_t ball_draws)
    : index_(std::move(index)), h_(bandwidth), box_(std::move(support)), ball_draws_(ball_draws) {
  if (!index_) throw Error("TruncatedUniformKernelEstimator: null index");
  if (!(h_ > 0.0) || !std::isfinite(h_))
    throw Error("TruncatedUniformKernelEstimator: bandwidth must be positive");
  if (box_.dim() != index_->dim())
    throw Error("TruncatedUniformKernelEstimator: support box dimension mismatch");
  if (ball_draws_ < kDefaultBallDraws)
    throw Error("TruncatedUniformKernelEstimator: need at least 10^4 ball draws");
  const std::size_t d = index_->dim();
  ball_volume_ = unit_ball_volume(d) * std::pow(h_, static_cast<double>(d));
  ball_points_ = unit_ball_draws(d, ball_draws_, ball_seed);
}

double TruncatedUniformKernelEstimator::intersection_volume(std::span<const double> x) const {
  const std::size_t d = x.size();
  bool interior = true;
  for (std::size_t j = 0; j < d; ++j)
    if (x[j] - h_ < box_.lower[j] || x[j] + h_ > box_.upper[j]) interior = false;
  if (interior) return ball_volume_;

  std::size_t inside = 0;
  for (std::size_t i = 0; i < ball_draws_; ++i) {
    const double* u = ball_points_.data() + i * d;
    bool in = true;
    for (std::size_t j = 0; j < d && in; ++j) {
      double p = x[j] + h_ * u[j];
      in = p >= box_.lower[j] && p <= box_.upper[j];
    }
    if (in) ++inside;
  }
  // The centre is inside the box, so a neighbourhood of it always is; guard the
  // unlucky case where no draw landed there.
  if (inside == 0) inside = 1;
  return ball_volume_ * static_cast<double>(inside) / static_cast<double>(ball_draws_);
}

double TruncatedUniformKernelEstimator::operator()(std::span<const double> x) const {
  if (x.size() != index_->dim()) throw Error("kernel_density: query dimension mismatch");
  if (!box_.contains(x)) throw Error("kernel_density: query point lies outside the support box");
  std::size_t count = index_->count_within(x, h_);
  if (count == 0) return 0.0;
  return static_cast<double>(count) /
         (static_cast<double>(index_->size()) * intersection_volume(x));
}

double kernel_density(const TruncatedUniformKernelEstimator& est, std::span<const double> x) {
  return est(x);
}

}  // namespace divest
