#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "divest/distributions.hpp"
#include "divest/ensemble.hpp"
#include "divest/functional.hpp"
#include "json.hpp"

namespace divest {

using Json = nlohmann::ordered_json;

enum class EstimatorKind { knn_plugin, kernel_plugin, ensemble_exact, ensemble_relaxed };

const std::vector<EstimatorKind>& all_estimators();
std::string to_string(EstimatorKind e);
EstimatorKind parse_estimator(const std::string& name);
std::string to_string(BandwidthRule r);
BandwidthRule parse_bandwidth_rule(const std::string& name);

/// Gaussian description that can be instantiated in any dimension: scalar
/// entries broadcast (mean m -> m 1_d, variance s -> s I_d, bounds -> cube),
/// explicit vectors/matrices fix the dimension.
struct GaussianTemplate {
  std::vector<double> mean{0.0};
  /// 1x1 = isotropic variance, otherwise a full d x d matrix.
  std::vector<std::vector<double>> covariance{{1.0}};
  bool truncated = false;
  std::vector<double> lower{0.0};
  std::vector<double> upper{1.0};

  GaussianSpec resolve(std::size_t d) const;
};

/// l values: an explicit list, or count values evenly spaced on [l_min, l_max].
struct IndexSetConfig {
  double l_min = 1.0;
  double l_max = 3.0;
  std::size_t count = 30;
  std::vector<double> values;

  EnsembleSpec resolve(std::size_t d) const;
};

struct ExperimentConfig {
  GaussianTemplate f1;
  GaussianTemplate f2;
  std::string g = "renyi:0.8";
  std::vector<EstimatorKind> estimators;
  std::vector<std::size_t> T_grid;
  std::vector<std::size_t> d_grid;
  std::size_t trials = 100;
  double alpha_frac = 0.5;
  double m1_ratio = 1.0;  // M1 = round(m1_ratio * T)
  IndexSetConfig l_set;
  double eta = 2.0;
  BandwidthRule kernel_bandwidth = BandwidthRule::volume_matched;
  std::size_t kernel_ball_draws = TruncatedUniformKernelEstimator::kDefaultBallDraws;
  std::size_t oracle_budget = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware concurrency
  bool record_timing = false;
  double reference_c = 100.0;

  /// The truncated-Gaussian study: means 0.7 and 0.3, variances 0.1 and 0.3
  /// on [0,1]^d, Renyi alpha = 0.8, all estimators.
  static ExperimentConfig truncated_gaussian_study();

  GFunctional functional() const { return GFunctional::parse(g); }
  std::size_t f1_count(std::size_t T) const;
  void validate() const;
};

Json to_json(const GaussianTemplate& t);
Json to_json(const ExperimentConfig& c);
/// Missing keys take the truncated_gaussian_study() defaults; unknown keys throw.
ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig load_experiment_config(const std::string& path);

GaussianTemplate gaussian_template_from_json(const Json& j);
Json to_json(const GaussianSpec& s);
Json to_json(const WeightVector& w, const EnsembleSpec& spec);

}  // namespace divest
