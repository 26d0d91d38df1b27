#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "divest/functional.hpp"
#include "divest/rng.hpp"
#include "divest/sample_set.hpp"

namespace divest {

/// Axis-aligned box [lower, upper].
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  static Box cube(std::size_t d, double a, double b);

  std::size_t dim() const { return lower.size(); }
  bool contains(std::span<const double> x) const;
  double volume() const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Multivariate Gaussian, optionally truncated to a box and renormalised.
struct GaussianSpec {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::optional<Box> truncation;

  /// mean_value * 1_d, variance * I_d, optional truncation.
  static GaussianSpec isotropic(std::size_t d, double mean_value, double variance,
                                std::optional<Box> truncation = std::nullopt);

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  std::string describe() const;
};

/// Validated, precomputed form of a GaussianSpec (Cholesky factor, box mass).
class GaussianModel {
 public:
  explicit GaussianModel(GaussianSpec spec);

  const GaussianSpec& spec() const { return spec_; }
  std::size_t dim() const { return d_; }

  /// Probability mass of the untruncated Gaussian inside the truncation box
  /// (1 when there is no box). Exact for diagonal covariance, otherwise a
  /// fixed-seed Monte Carlo estimate with 10^6 draws.
  double box_mass() const { return box_mass_; }
  bool diagonal() const { return diagonal_; }

  /// Truncated-and-renormalised density; 0 outside the box.
  double density_at(std::span<const double> x) const;

  /// n draws; truncation by rejection against the box.
  SampleSet sample(std::size_t n, Seed seed) const;

  /// One draw into out (length d).
  void draw(Rng& rng, std::span<double> out) const;

 private:
  double untruncated_log_density(std::span<const double> x) const;
  void draw_untruncated(Rng& rng, std::span<double> out) const;

  GaussianSpec spec_;
  std::size_t d_;
  std::vector<double> chol_;  // lower-triangular factor, row-major d x d
  double log_norm_ = 0.0;     // -0.5 d log(2 pi) - log det(L)
  double log_box_mass_ = 0.0;
  double box_mass_ = 1.0;
  bool diagonal_ = false;
};

SampleSet sample(const GaussianSpec& spec, std::size_t n, Seed seed);
double density_at(const GaussianSpec& spec, std::span<const double> x);

struct OracleResult {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t budget = 0;
  /// Closed-form value, filled for untruncated Gaussians with a Renyi g.
  std::optional<double> closed_form;
};

/// Monte Carlo estimate of G(f1,f2) = E_{f2}[g(f1(X)/f2(X))] from exact density
/// evaluations, drawing X from f2. The budget is split into fixed chunks with
/// derived seeds, so the result does not depend on the thread count.
OracleResult true_divergence(const GaussianSpec& f1, const GaussianSpec& f2, const GFunctional& g,
                             std::size_t mc_budget, Seed seed, unsigned threads = 1);

/// Closed form of the integral of f1^alpha f2^(1-alpha) for untruncated Gaussians:
/// det(S1)^((1-a)/2) det(S2)^(a/2) det(Sa)^(-1/2) exp(-a(1-a)/2 dmu' Sa^-1 dmu),
/// with Sa = (1-a) S1 + a S2.
double gaussian_renyi_integral(const GaussianSpec& f1, const GaussianSpec& f2, double alpha);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace divest
