#include "divest/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "divest/error.hpp"

namespace divest {

std::size_t round_half_up(double x, std::size_t lo, std::size_t hi) {
  double r = std::floor(x + 0.5);
  if (!(r >= static_cast<double>(lo))) return lo;
  if (r > static_cast<double>(hi)) return hi;
  return static_cast<std::size_t>(r);
}

std::size_t SplitConfig::reference_count() const {
  return round_half_up(alpha_frac * static_cast<double>(total), 0, total);
}

std::size_t SplitConfig::evaluation_count() const { return total - reference_count(); }

void SplitConfig::validate(std::size_t k1, std::size_t k2) const {
  if (!(alpha_frac > 0.0 && alpha_frac < 1.0)) throw Error("SplitConfig: alpha_frac must lie in (0,1)");
  std::size_t m2 = reference_count();
  std::size_t n = evaluation_count();
  if (n < 1) throw Error("SplitConfig: evaluation set is empty");
  if (k2 < 1 || k2 > m2)
    throw Error("SplitConfig: need 1 <= k2 <= M2 (k2=" + std::to_string(k2) + ", M2=" + std::to_string(m2) + ")");
  if (k1 < 1 || k1 > f1_count)
    throw Error("SplitConfig: need 1 <= k1 <= M1 (k1=" + std::to_string(k1) + ", M1=" +
                std::to_string(f1_count) + ")");
}

DataSplit split_f2(const SampleSet& samples, double alpha_frac, Seed seed) {
  const std::size_t t = samples.rows();
  if (t < 2) throw Error("split_f2: need at least two f2 samples");
  if (!(alpha_frac > 0.0 && alpha_frac < 1.0)) throw Error("split_f2: alpha_frac must lie in (0,1)");
  SplitConfig cfg{t, alpha_frac, 0};
  std::size_t m2 = cfg.reference_count();
  std::size_t n = t - m2;
  if (m2 == 0 || n == 0)
    throw Error("split_f2: alpha_frac=" + std::to_string(alpha_frac) + " leaves one side of the split empty");

  std::vector<std::size_t> perm(t);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = t - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
  std::span<const std::size_t> all(perm);
  return DataSplit{samples.select(all.first(n)), samples.select(all.subspan(n))};
}

NeighborDistanceTable::NeighborDistanceTable(const NeighborIndex& index, const SampleSet& eval,
                                             std::size_t k_max)
    : rows_(eval.rows()), k_max_(k_max), reference_size_(index.size()), dim_(index.dim()) {
  if (eval.dim() != index.dim()) throw Error("NeighborDistanceTable: dimension mismatch");
  if (k_max_ == 0 || k_max_ > index.size())
    throw Error("NeighborDistanceTable: need 1 <= k <= M (k=" + std::to_string(k_max_) +
                ", M=" + std::to_string(index.size()) + ")");
  dist_.resize(rows_ * k_max_);
  for (std::size_t i = 0; i < rows_; ++i) {
    auto d = index.nearest_distances(eval.row(i), k_max_);
    std::copy(d.begin(), d.end(), dist_.begin() + static_cast<std::ptrdiff_t>(i * k_max_));
  }
}

LikelihoodRatioField knn_ratio_field(const NeighborDistanceTable& f1_table,
                                     const NeighborDistanceTable& f2_table, std::size_t k1,
                                     std::size_t k2) {
  if (f1_table.rows() != f2_table.rows())
    throw Error("knn_ratio_field: tables cover different evaluation sets");
  if (k1 < 1 || k1 > f1_table.k_max() || k2 < 1 || k2 > f2_table.k_max())
    throw Error("knn_ratio_field: k outside the tabulated range");
  const std::size_t d = f1_table.dim();
  LikelihoodRatioField field;
  field.ratios.resize(f1_table.rows());
  for (std::size_t i = 0; i < f1_table.rows(); ++i) {
    double p1 = knn_density_value(k1, f1_table.reference_size(), d, f1_table.distance(i, k1));
    double p2 = knn_density_value(k2, f2_table.reference_size(), d, f2_table.distance(i, k2));
    double r = p1 / p2;
    if (!(r > 0.0) || !std::isfinite(r))
      throw Error("knn_ratio_field: likelihood ratio is not positive and finite at evaluation point " +
                  std::to_string(i));
    field.ratios[i] = r;
  }
  return field;
}

double order_independent_mean(std::vector<double> values) {
  if (values.empty()) throw Error("mean of an empty set");
  std::sort(values.begin(), values.end());
  // Neumaier summation over the sorted values.
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(values.size());
}

Estimate plugin_from_ratios(const LikelihoodRatioField& field, const GFunctional& g) {
  std::vector<double> vals(field.ratios.size());
  for (std::size_t i = 0; i < vals.size(); ++i) {
    vals[i] = g(field.ratios[i]);
    if (!std::isfinite(vals[i]))
      throw Error("plug-in estimate: g(" + std::to_string(field.ratios[i]) + ") is not finite");
  }
  Estimate e;
  e.functional = order_independent_mean(std::move(vals));
  e.divergence = g.to_divergence(e.functional);
  return e;
}

Estimate plugin_from_tables(const NeighborDistanceTable& f1_table,
                            const NeighborDistanceTable& f2_table, std::size_t k1, std::size_t k2,
                            const GFunctional& g) {
  return plugin_from_ratios(knn_ratio_field(f1_table, f2_table, k1, k2), g);
}

namespace {

void check_inputs(const SampleSet& eval, const SampleSet& ref_f2, const SampleSet& f1) {
  if (eval.empty() || ref_f2.empty() || f1.empty()) throw Error("plug-in estimate: empty input sample");
  if (eval.dim() != ref_f2.dim() || eval.dim() != f1.dim())
    throw Error("plug-in estimate: inputs have inconsistent dimensions");
}

}  // namespace

Estimate plugin_estimate(const SampleSet& eval, const SampleSet& ref_f2, const SampleSet& f1,
                         std::size_t k1, std::size_t k2, const GFunctional& g) {
  check_inputs(eval, ref_f2, f1);
  if (k1 < 1 || k1 > f1.rows())
    throw Error("plug-in estimate: need 1 <= k1 <= M1 (k1=" + std::to_string(k1) + ", M1=" +
                std::to_string(f1.rows()) + ")");
  if (k2 < 1 || k2 > ref_f2.rows())
    throw Error("plug-in estimate: need 1 <= k2 <= M2 (k2=" + std::to_string(k2) + ", M2=" +
                std::to_string(ref_f2.rows()) + ")");
  NeighborIndex i1(f1);
  NeighborIndex i2(ref_f2);
  NeighborDistanceTable t1(i1, eval, k1);
  NeighborDistanceTable t2(i2, eval, k2);
  return plugin_from_tables(t1, t2, k1, k2, g);
}

Estimate plugin_estimate_kernel(const SampleSet& eval, const SampleSet& ref_f2, const SampleSet& f1,
                                const KernelPluginOptions& options, const GFunctional& g) {
  check_inputs(eval, ref_f2, f1);
  const std::size_t d = eval.dim();
  if (options.support.dim() != d) throw Error("kernel plug-in: support box dimension mismatch");
  double h1 = kernel_bandwidth(options.k1, f1.rows(), d, options.rule);
  double h2 = kernel_bandwidth(options.k2, ref_f2.rows(), d, options.rule);
  TruncatedUniformKernelEstimator e1(std::make_shared<const NeighborIndex>(f1), h1, options.support,
                                     options.ball_seed, options.ball_draws);
  TruncatedUniformKernelEstimator e2(std::make_shared<const NeighborIndex>(ref_f2), h2,
                                     options.support, options.ball_seed, options.ball_draws);
  std::vector<double> vals(eval.rows());
  for (std::size_t i = 0; i < eval.rows(); ++i) {
    double p1 = e1(eval.row(i));
    double p2 = e2(eval.row(i));
    // An empty f2 kernel gives ratio inf (or nan when f1 is empty too); this
    // is only an error if g cannot absorb it.
    double r = p2 > 0.0 ? p1 / p2 : (p1 > 0.0 ? std::numeric_limits<double>::infinity()
                                               : std::numeric_limits<double>::quiet_NaN());
    vals[i] = g(r);
    if (!std::isfinite(vals[i])) {
      if (!(p2 > 0.0))
        throw Error("kernel plug-in: f2 kernel of radius " + std::to_string(h2) +
                    " holds no reference point at evaluation point " + std::to_string(i));
      throw Error("kernel plug-in: g(" + std::to_string(r) + ") is not finite");
    }
  }
  Estimate e;
  e.functional = order_independent_mean(std::move(vals));
  e.divergence = g.to_divergence(e.functional);
  return e;
}

std::size_t default_plugin_k(std::size_t m) {
  if (m == 0) throw Error("default_plugin_k: empty reference set");
  return round_half_up(std::sqrt(static_cast<double>(m)), 1, m);
}

}  // namespace divest
