#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "divest/density.hpp"
#include "divest/functional.hpp"
#include "divest/sample_set.hpp"
#include "divest/spatial.hpp"

namespace divest {

/// round(x) with halves rounded up, clamped to [lo, hi].
std::size_t round_half_up(double x, std::size_t lo, std::size_t hi);

/// Sizes of the f2 split and the f1 sample.
struct SplitConfig {
  std::size_t total = 0;        // T: f2 budget
  double alpha_frac = 0.5;      // M2 = round(alpha_frac * T)
  std::size_t f1_count = 0;     // M1

  std::size_t reference_count() const;   // M2
  std::size_t evaluation_count() const;  // N = T - M2
  void validate(std::size_t k1, std::size_t k2) const;
};

struct DataSplit {
  SampleSet eval;       // X_1..X_N, where the ratio is evaluated
  SampleSet reference;  // X_{N+1}..X_T, the f2 density reference
};

/// Uniformly random partition of the f2 sample into N evaluation points and
/// M2 = round(alpha_frac * T) reference points.
DataSplit split_f2(const SampleSet& samples, double alpha_frac, Seed seed);

/// Functional value G and the divergence derived from it.
struct Estimate {
  double functional = 0.0;
  double divergence = 0.0;
};

/// Sorted distances from every evaluation point to its k_max nearest reference
/// points. Computing it once lets every (k1, k2) pair reuse the same search.
class NeighborDistanceTable {
 public:
  NeighborDistanceTable(const NeighborIndex& index, const SampleSet& eval, std::size_t k_max);

  std::size_t rows() const { return rows_; }
  std::size_t k_max() const { return k_max_; }
  std::size_t reference_size() const { return reference_size_; }
  std::size_t dim() const { return dim_; }

  /// Distance from evaluation point i to its k-th neighbour (1-based).
  double distance(std::size_t i, std::size_t k) const { return dist_[i * k_max_ + (k - 1)]; }

 private:
  std::size_t rows_, k_max_, reference_size_, dim_;
  std::vector<double> dist_;
};

/// L(X_i) = f1_hat(X_i) / f2_hat(X_i) at the N evaluation points.
struct LikelihoodRatioField {
  std::vector<double> ratios;
};

LikelihoodRatioField knn_ratio_field(const NeighborDistanceTable& f1_table,
                                     const NeighborDistanceTable& f2_table, std::size_t k1,
                                     std::size_t k2);

/// Mean of g over a ratio field, then the divergence post-transform.
Estimate plugin_from_ratios(const LikelihoodRatioField& field, const GFunctional& g);

Estimate plugin_from_tables(const NeighborDistanceTable& f1_table,
                            const NeighborDistanceTable& f2_table, std::size_t k1, std::size_t k2,
                            const GFunctional& g);

/// k-NN plug-in estimate of G(f1, f2): mean over the evaluation points of
/// g(f1_hat / f2_hat), f1_hat from the f1 sample and f2_hat from the f2 reference set.
Estimate plugin_estimate(const SampleSet& eval, const SampleSet& ref_f2, const SampleSet& f1,
                         std::size_t k1, std::size_t k2, const GFunctional& g);

struct KernelPluginOptions {
  std::size_t k1 = 0;  // bandwidth for f1 from (k1, M1)
  std::size_t k2 = 0;  // bandwidth for f2 from (k2, M2)
  BandwidthRule rule = BandwidthRule::volume_matched;
  Box support;
  Seed ball_seed{};
  std::size_t ball_draws = TruncatedUniformKernelEstimator::kDefaultBallDraws;
};

/// Same skeleton with truncated uniform-kernel density estimates. Empty kernels
/// give ratios 0 (f1 empty), inf (f2 empty) or nan (both); the estimate is an
/// error when g is not finite at such a ratio.
Estimate plugin_estimate_kernel(const SampleSet& eval, const SampleSet& ref_f2, const SampleSet& f1,
                                const KernelPluginOptions& options, const GFunctional& g);

/// Default k for a standalone plug-in: round(sqrt(M)).
std::size_t default_plugin_k(std::size_t m);

/// Mean that is bitwise independent of the order of values (sorted, compensated sum).
double order_independent_mean(std::vector<double> values);

}  // namespace divest
