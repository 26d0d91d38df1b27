#include "divest/ensemble.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <sstream>

#include "divest/error.hpp"

namespace divest {

namespace {

using Real = boost::multiprecision::cpp_bin_float_50;
using RealMatrix = std::vector<std::vector<Real>>;

constexpr double kSumTolerance = 1e-12;
constexpr double kConstraintTolerance = 1e-10;
constexpr double kSingularCondition = 1e40;

RealMatrix zeros(std::size_t r, std::size_t c) { return RealMatrix(r, std::vector<Real>(c, Real(0))); }

// Gauss-Jordan inverse with partial pivoting. Returns false if a pivot vanishes.
bool invert(RealMatrix a, RealMatrix& inv) {
  const std::size_t n = a.size();
  inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    Real p = a[col][col];
    for (std::size_t c = 0; c < n; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Real f = a[r][col];
      for (std::size_t c = 0; c < n; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return true;
}

// Solves a x = b in place (partial pivoting); false when singular.
bool solve(RealMatrix a, std::vector<Real> b, std::vector<Real>& x) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (abs(a[r][col]) > abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      Real f = a[r][col] / a[col][col];
      if (f == 0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, Real(0));
  for (std::size_t i = n; i-- > 0;) {
    Real s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return true;
}

Real norm1(const RealMatrix& a) {
  Real best = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    Real s = 0;
    for (std::size_t r = 0; r < a.size(); ++r) s += abs(a[r][c]);
    best = std::max(best, s);
  }
  return best;
}

// Constraint matrix: row 0 all ones, row i = scale_i * l^(i/d).
RealMatrix constraint_matrix(const EnsembleSpec& spec, const std::vector<Real>& scale) {
  const std::size_t d = spec.dim();
  const std::size_t L = spec.size();
  RealMatrix a = zeros(d, L);
  for (std::size_t l = 0; l < L; ++l) {
    Real lv(spec.indices()[l]);
    a[0][l] = 1;
    for (std::size_t i = 1; i < d; ++i) a[i][l] = scale[i] * pow(lv, Real(i) / Real(d));
  }
  return a;
}

RealMatrix gram(const RealMatrix& a) {
  const std::size_t d = a.size();
  RealMatrix g = zeros(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      Real s = 0;
      for (std::size_t l = 0; l < a[i].size(); ++l) s += a[i][l] * a[j][l];
      g[i][j] = s;
      g[j][i] = s;
    }
  return g;
}

// Inverse Gram of the constraint rows, with singularity and condition checks.
RealMatrix inverse_gram(const RealMatrix& a) {
  RealMatrix g = gram(a);
  RealMatrix h;
  if (!invert(g, h)) throw Error("weight solver: constraint Gram matrix is singular; spread l wider");
  Real cond = norm1(g) * norm1(h);
  if (cond > Real(kSingularCondition)) {
    std::ostringstream os;
    os << "weight solver: constraint Gram matrix is numerically singular (condition estimate "
       << static_cast<double>(cond) << "); spread the index set l wider";
    throw Error(os.str());
  }
  return h;
}

std::vector<Real> matvec(const RealMatrix& m, const std::vector<Real>& v) {
  std::vector<Real> out(m.size(), Real(0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
  return out;
}

// w = A^T y, rounded to double.
std::vector<double> weights_from(const RealMatrix& a, const std::vector<Real>& y) {
  const std::size_t L = a[0].size();
  std::vector<double> w(L);
  for (std::size_t l = 0; l < L; ++l) {
    Real s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i][l] * y[i];
    w[l] = static_cast<double>(s);
  }
  return w;
}

// Residual A w - b (b = e_0) with the unscaled constraint rows.
std::vector<Real> residual(const RealMatrix& a, const std::vector<double>& w) {
  std::vector<Real> r(a.size(), Real(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t l = 0; l < w.size(); ++l) r[i] += a[i][l] * Real(w[l]);
  r[0] -= 1;
  return r;
}

// One step of iterative refinement in the row space, then move the remaining
// sum error onto the smallest-magnitude weight, whose ulp is finest.
void refine(const RealMatrix& a, const RealMatrix& h, std::vector<double>& w) {
  std::vector<Real> r = residual(a, w);
  for (Real& v : r) v = -v;
  std::vector<Real> y = matvec(h, r);
  for (std::size_t l = 0; l < w.size(); ++l) {
    Real s = Real(w[l]);
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i][l] * y[i];
    w[l] = static_cast<double>(s);
  }
  Real sum = 0;
  for (double v : w) sum += Real(v);
  auto j = static_cast<std::size_t>(std::min_element(w.begin(), w.end(), [](double x, double y) {
                                      return std::abs(x) < std::abs(y);
                                    }) - w.begin());
  w[j] = static_cast<double>(Real(w[j]) - (sum - 1));
}

std::vector<Real> unit_scale(std::size_t d) { return std::vector<Real>(d, Real(1)); }

// Minimises c + 2 b^T z + z^T Q z over the box |z_i| <= eps (Q positive definite)
// with a primal active-set method. Returns the minimiser.
std::vector<Real> box_qp(const RealMatrix& q, const std::vector<Real>& b, const Real& eps) {
  const std::size_t n = b.size();
  std::vector<Real> z(n, Real(0));
  if (n == 0 || eps == 0) return z;
  enum Status { free_, lower, upper };
  std::vector<Status> status(n, free_);

  for (int iter = 0; iter < 500; ++iter) {
    std::vector<std::size_t> fr;
    for (std::size_t i = 0; i < n; ++i)
      if (status[i] == free_) fr.push_back(i);

    std::vector<Real> target = z;
    if (!fr.empty()) {
      RealMatrix qf = zeros(fr.size(), fr.size());
      std::vector<Real> rhs(fr.size());
      for (std::size_t a = 0; a < fr.size(); ++a) {
        rhs[a] = -b[fr[a]];
        for (std::size_t j = 0; j < n; ++j)
          if (status[j] != free_) rhs[a] -= q[fr[a]][j] * z[j];
        for (std::size_t c = 0; c < fr.size(); ++c) qf[a][c] = q[fr[a]][fr[c]];
      }
      std::vector<Real> sol;
      if (!solve(qf, rhs, sol)) throw Error("relaxed weight solver: singular reduced system");
      for (std::size_t a = 0; a < fr.size(); ++a) target[fr[a]] = sol[a];
    }

    // Longest feasible step toward the subspace minimiser.
    Real step = 1;
    std::size_t blocking = n;
    for (std::size_t i : fr) {
      Real dz = target[i] - z[i];
      if (dz > 0 && target[i] > eps) {
        Real t = (eps - z[i]) / dz;
        if (t < step) step = t, blocking = i;
      } else if (dz < 0 && target[i] < -eps) {
        Real t = (-eps - z[i]) / dz;
        if (t < step) step = t, blocking = i;
      }
    }
    for (std::size_t i : fr) z[i] += step * (target[i] - z[i]);
    if (blocking < n) {
      status[blocking] = target[blocking] > 0 ? upper : lower;
      z[blocking] = status[blocking] == upper ? eps : -eps;
      continue;
    }

    // Subspace optimum reached: release the bound with the worst multiplier.
    Real worst = 0;
    std::size_t release = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (status[i] == free_) continue;
      Real grad = b[i];
      Real scale = abs(b[i]);
      for (std::size_t j = 0; j < n; ++j) {
        grad += q[i][j] * z[j];
        scale += abs(q[i][j] * z[j]);
      }
      // At the upper bound the objective must not decrease when z_i decreases.
      // Multipliers at rounding level are treated as zero, otherwise a
      // degenerate vertex can cycle.
      Real violation = status[i] == upper ? grad : -grad;
      if (violation > Real(1e-30) * scale && violation > worst) worst = violation, release = i;
    }
    if (release == n) return z;
    status[release] = free_;
  }
  throw Error("relaxed weight solver: active-set iteration did not converge");
}

Real quadratic_value(const RealMatrix& h, const std::vector<Real>& y) {
  Real s = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) s += y[i] * h[i][j] * y[j];
  return s;
}

}  // namespace

EnsembleSpec::EnsembleSpec(std::vector<double> indices, std::size_t d)
    : indices_(std::move(indices)), d_(d) {
  if (d_ == 0) throw Error("EnsembleSpec: dimension must be at least 1");
  if (indices_.empty()) throw Error("EnsembleSpec: empty index set");
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (!(indices_[i] > 0.0) || !std::isfinite(indices_[i]))
      throw Error("EnsembleSpec: indices must be positive and finite");
    if (i > 0 && !(indices_[i] > indices_[i - 1]))
      throw Error("EnsembleSpec: indices must be strictly increasing");
  }
  if (indices_.size() < d_)
    throw Error("EnsembleSpec: need L >= d (L=" + std::to_string(indices_.size()) +
                ", d=" + std::to_string(d_) + ") so the d-1 bias constraints can be met");
}

EnsembleSpec EnsembleSpec::evenly_spaced(std::size_t d, double lo, double hi, std::size_t count) {
  if (count == 0) throw Error("EnsembleSpec: empty index set");
  std::vector<double> l(count);
  if (count == 1) {
    l[0] = lo;
  } else {
    for (std::size_t i = 0; i < count; ++i)
      l[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return EnsembleSpec(std::move(l), d);
}

double EnsembleSpec::basis(std::size_t i, double l) const {
  return std::pow(l, static_cast<double>(i) / static_cast<double>(d_));
}

std::vector<std::size_t> EnsembleSpec::k_values(std::size_t m1, std::size_t m2) const {
  const std::size_t cap = std::min(m1, m2);
  std::vector<std::size_t> ks(indices_.size());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    double raw = std::floor(indices_[i] * std::sqrt(static_cast<double>(m2)) + 0.5);
    if (raw > static_cast<double>(cap))
      throw Error("ensemble: k(l) = " + std::to_string(static_cast<long long>(raw)) + " for l = " +
                  std::to_string(indices_[i]) + " exceeds min(M1, M2) = " + std::to_string(cap));
    ks[i] = std::max<std::size_t>(1, static_cast<std::size_t>(raw));
  }
  return ks;
}

double WeightVector::max_abs_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, std::abs(r));
  return m;
}

void fill_diagnostics(const EnsembleSpec& spec, WeightVector& w) {
  if (w.weights.size() != spec.size()) throw Error("weight vector does not match the index set");
  RealMatrix a = constraint_matrix(spec, unit_scale(spec.dim()));
  std::vector<Real> r = residual(a, w.weights);
  w.sum_residual = static_cast<double>(r[0]);
  w.residuals.assign(r.size() - 1, 0.0);
  for (std::size_t i = 1; i < r.size(); ++i) w.residuals[i - 1] = static_cast<double>(r[i]);
  Real n2 = 0;
  for (double v : w.weights) n2 += Real(v) * Real(v);
  w.norm = static_cast<double>(sqrt(n2));
}

WeightVector solve_exact_weights(const EnsembleSpec& spec) {
  const std::size_t d = spec.dim();
  RealMatrix a = constraint_matrix(spec, unit_scale(d));
  RealMatrix h = inverse_gram(a);
  std::vector<Real> e0(d, Real(0));
  e0[0] = 1;
  WeightVector out;
  out.mode = WeightVector::Mode::exact;
  out.weights = weights_from(a, matvec(h, e0));
  refine(a, h, out.weights);
  fill_diagnostics(spec, out);
  if (std::abs(out.sum_residual) > kSumTolerance || out.max_abs_residual() > kConstraintTolerance) {
    std::ostringstream os;
    os << "exact weight solver: the minimum-norm weights have norm " << out.norm
       << " and cannot be represented in double precision within tolerance (|sum w - 1| = "
       << std::abs(out.sum_residual) << ", max |gamma| = " << out.max_abs_residual()
       << "); the constraints are ill-conditioned, spread the index set l wider";
    throw Error(os.str());
  }
  return out;
}

WeightVector solve_relaxed_weights(const EnsembleSpec& spec, std::size_t sample_size, double eta) {
  const std::size_t d = spec.dim();
  const std::size_t L = spec.size();
  if (sample_size == 0) throw Error("relaxed weight solver: T must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw Error("relaxed weight solver: eta must be positive");
  const Real eta2 = Real(eta) * Real(eta) * Real(1 + 4e-12);
  if (eta2 < Real(1) / Real(L)) {
    std::ostringstream os;
    os << "relaxed weight solver: infeasible, eta = " << eta << " is below 1/sqrt(L) = "
       << 1.0 / std::sqrt(static_cast<double>(L)) << ", the smallest norm with sum w = 1";
    throw Error(os.str());
  }

  std::vector<Real> scale(d, Real(1));
  for (std::size_t i = 1; i < d; ++i)
    scale[i] = pow(Real(sample_size), Real(d - i) / Real(2 * d));
  RealMatrix a = constraint_matrix(spec, scale);
  RealMatrix h = inverse_gram(a);

  // In terms of y = A w (y_0 = 1, y_i the scaled constraint values), the
  // smallest |w|^2 achieving y is y^T H y with H = (A A^T)^-1.
  const std::size_t n = d - 1;
  RealMatrix q = zeros(n, n);
  std::vector<Real> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = h[i + 1][0];
    for (std::size_t j = 0; j < n; ++j) q[i][j] = h[i + 1][j + 1];
  }
  auto best_y = [&](const Real& eps) {
    std::vector<Real> z = box_qp(q, b, eps);
    std::vector<Real> y(d);
    y[0] = 1;
    for (std::size_t i = 0; i < n; ++i) y[i + 1] = z[i];
    return y;
  };

  Real lo = 0;
  Real hi = 0;
  std::vector<Real> y(d, Real(0));
  y[0] = 1;
  if (quadratic_value(h, y) > eta2) {
    // Uniform weights are norm-feasible; their constraint values bound eps.
    for (std::size_t i = 1; i < d; ++i) {
      Real s = 0;
      for (std::size_t l = 0; l < L; ++l) s += a[i][l];
      hi = std::max(hi, abs(s / Real(L)));
    }
    y = best_y(hi);
    for (int it = 0; it < 400 && hi - lo > Real(1e-13) * hi; ++it) {
      Real mid = (lo + hi) / 2;
      std::vector<Real> ym = best_y(mid);
      if (quadratic_value(h, ym) <= eta2) {
        hi = mid;
        y = std::move(ym);
      } else {
        lo = mid;
      }
    }
  }

  WeightVector out;
  out.mode = WeightVector::Mode::relaxed;
  out.sample_size = sample_size;
  out.eta = eta;
  out.weights = weights_from(a, matvec(h, y));
  Real sum = 0;
  for (double v : out.weights) sum += Real(v);
  auto j = static_cast<std::size_t>(
      std::min_element(out.weights.begin(), out.weights.end(),
                       [](double x, double z) { return std::abs(x) < std::abs(z); }) -
      out.weights.begin());
  out.weights[j] = static_cast<double>(Real(out.weights[j]) - (sum - 1));
  fill_diagnostics(spec, out);

  double eps = 0.0;
  for (std::size_t i = 1; i < d; ++i)
    eps = std::max(eps, std::abs(out.residuals[i - 1]) * static_cast<double>(scale[i]));
  out.epsilon = eps;
  out.epsilon_lower_bound = static_cast<double>(lo);
  if (std::abs(out.sum_residual) > kSumTolerance || out.norm > eta * (1 + 1e-8) ||
      out.epsilon - out.epsilon_lower_bound > 1e-6)
    throw Error("relaxed weight solver: solution failed its certificate check");
  return out;
}

EnsembleEstimate ensemble_from_tables(const NeighborDistanceTable& f1_table,
                                      const NeighborDistanceTable& f2_table,
                                      const EnsembleSpec& spec, const WeightVector& w,
                                      const GFunctional& g) {
  if (w.weights.size() != spec.size()) throw Error("ensemble: weight vector does not match the index set");
  if (f1_table.dim() != spec.dim()) throw Error("ensemble: data dimension differs from the ensemble dimension");
  EnsembleEstimate out;
  out.k_values = spec.k_values(f1_table.reference_size(), f2_table.reference_size());
  std::size_t k_max = *std::max_element(out.k_values.begin(), out.k_values.end());
  if (k_max > f1_table.k_max() || k_max > f2_table.k_max())
    throw Error("ensemble: neighbour tables do not reach k = " + std::to_string(k_max));
  out.member_functionals.resize(spec.size());
  for (std::size_t l = 0; l < spec.size(); ++l) {
    std::size_t k = out.k_values[l];
    out.member_functionals[l] = plugin_from_tables(f1_table, f2_table, k, k, g).functional;
  }
  // sum w(l) G(l) written as G(0) + sum w(l) (G(l) - G(0)), equal since sum w = 1;
  // identical members then give that value exactly.
  const double anchor = out.member_functionals[0];
  double spread = 0.0;
  for (std::size_t l = 0; l < spec.size(); ++l) spread += w.weights[l] * (out.member_functionals[l] - anchor);
  out.combined.functional = anchor + spread;
  out.combined.divergence = g.to_divergence(out.combined.functional);
  return out;
}

EnsembleEstimate ensemble_estimate(const SampleSet& eval, const SampleSet& ref_f2,
                                   const SampleSet& f1, const EnsembleSpec& spec,
                                   const WeightVector& w, const GFunctional& g) {
  if (eval.empty() || ref_f2.empty() || f1.empty()) throw Error("ensemble: empty input sample");
  if (eval.dim() != ref_f2.dim() || eval.dim() != f1.dim())
    throw Error("ensemble: inputs have inconsistent dimensions");
  auto ks = spec.k_values(f1.rows(), ref_f2.rows());
  std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  NeighborIndex i1(f1);
  NeighborIndex i2(ref_f2);
  NeighborDistanceTable t1(i1, eval, k_max);
  NeighborDistanceTable t2(i2, eval, k_max);
  return ensemble_from_tables(t1, t2, spec, w, g);
}

}  // namespace divest
