#pragma once

#include <cstddef>
#include <vector>

#include "divest/divergence.hpp"
#include "divest/functional.hpp"
#include "divest/sample_set.hpp"

namespace divest {

/// Index set l_1 < ... < l_L, the dimension d, the basis exponents
/// J = {1, ..., d-1} with psi_i(l) = l^(i/d), and the map k(l) = round(l sqrt(M2)).
class EnsembleSpec {
 public:
  EnsembleSpec(std::vector<double> indices, std::size_t d);

  /// L values evenly spaced on [lo, hi].
  static EnsembleSpec evenly_spaced(std::size_t d, double lo, double hi, std::size_t count);

  const std::vector<double>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  std::size_t dim() const { return d_; }
  /// Number of bias constraints, |J| = d - 1.
  std::size_t constraint_count() const { return d_ - 1; }

  double basis(std::size_t i, double l) const;

  /// k(l) for every index, rounded half-up and at least 1. Throws when some
  /// k(l) exceeds min(M1, M2).
  std::vector<std::size_t> k_values(std::size_t m1, std::size_t m2) const;

 private:
  std::vector<double> indices_;
  std::size_t d_;
};

struct WeightVector {
  enum class Mode { exact, relaxed };

  Mode mode = Mode::exact;
  std::vector<double> weights;
  /// gamma_w(i) = sum_l w(l) psi_i(l) for i = 1..d-1, evaluated in extended precision.
  std::vector<double> residuals;
  /// sum_l w(l) - 1, evaluated in extended precision.
  double sum_residual = 0.0;
  double norm = 0.0;

  // Relaxed solver only.
  std::size_t sample_size = 0;  // T
  double eta = 0.0;
  /// Achieved max_i |gamma_w(i)| T^((d-i)/(2d)).
  double epsilon = 0.0;
  /// Largest epsilon proven infeasible; the optimum lies in [lower bound, epsilon].
  double epsilon_lower_bound = 0.0;

  double max_abs_residual() const;
};

/// Minimum-norm w with sum w = 1 and gamma_w(i) = 0 for i in J, i.e.
/// w = A^T (A A^T)^-1 e_0, computed in 50-digit arithmetic and rounded.
/// Throws when the Gram matrix is numerically singular or when no rounding of
/// the solution to double meets |sum w - 1| <= 1e-12 and |gamma_w(i)| <= 1e-10.
WeightVector solve_exact_weights(const EnsembleSpec& spec);

/// min eps over (w, eps) subject to sum w = 1, |gamma_w(i)| T^((d-i)/(2d)) <= eps
/// for i in J, and |w|_2 <= eta. When eps = 0 is attainable the exact
/// minimum-norm solution is returned. Throws when eta < 1/sqrt(L).
WeightVector solve_relaxed_weights(const EnsembleSpec& spec, std::size_t sample_size, double eta);

/// Residuals, sum residual and norm of arbitrary weights for a spec, in extended precision.
void fill_diagnostics(const EnsembleSpec& spec, WeightVector& w);

struct EnsembleEstimate {
  Estimate combined;
  std::vector<std::size_t> k_values;
  std::vector<double> member_functionals;  // G_hat_{k(l)} for each l
};

/// sum_l w(l) G_hat_{k(l), k(l)} over one shared data split.
EnsembleEstimate ensemble_from_tables(const NeighborDistanceTable& f1_table,
                                      const NeighborDistanceTable& f2_table,
                                      const EnsembleSpec& spec, const WeightVector& w,
                                      const GFunctional& g);

EnsembleEstimate ensemble_estimate(const SampleSet& eval, const SampleSet& ref_f2,
                                   const SampleSet& f1, const EnsembleSpec& spec,
                                   const WeightVector& w, const GFunctional& g);

}  // namespace divest
