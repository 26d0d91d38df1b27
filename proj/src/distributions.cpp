#include "divest/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include "divest/error.hpp"

namespace divest {

namespace {

constexpr double kMinAcceptance = 1e-6;
constexpr std::size_t kBoxMassDraws = 1'000'000;
constexpr std::size_t kOracleChunks = 64;
constexpr std::size_t kMinOracleBudget = 100'000;

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Box Box::cube(std::size_t d, double a, double b) {
  return Box{std::vector<double>(d, a), std::vector<double>(d, b)};
}

bool Box::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  return true;
}

double Box::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lower.size(); ++j) v *= upper[j] - lower[j];
  return v;
}

GaussianSpec GaussianSpec::isotropic(std::size_t d, double mean_value, double variance,
                                     std::optional<Box> truncation) {
  GaussianSpec s;
  s.mean = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(d), mean_value);
  s.covariance = variance * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d),
                                                      static_cast<Eigen::Index>(d));
  s.truncation = std::move(truncation);
  return s;
}

std::string GaussianSpec::describe() const {
  std::ostringstream os;
  os.precision(6);
  os << "Gaussian(d=" << dim() << ", mean=[";
  for (Eigen::Index i = 0; i < mean.size(); ++i) os << (i ? "," : "") << mean[i];
  os << "], cov diag=[";
  for (Eigen::Index i = 0; i < covariance.rows(); ++i) os << (i ? "," : "") << covariance(i, i);
  os << "]";
  if (truncation) {
    os << ", box=[";
    for (std::size_t j = 0; j < truncation->dim(); ++j)
      os << (j ? " x " : "") << "[" << truncation->lower[j] << "," << truncation->upper[j] << "]";
    os << "]";
  }
  os << ")";
  return os.str();
}

GaussianModel::GaussianModel(GaussianSpec spec) : spec_(std::move(spec)), d_(spec_.dim()) {
  if (d_ == 0) throw Error("GaussianSpec: dimension must be at least 1");
  const auto n = static_cast<Eigen::Index>(d_);
  if (spec_.covariance.rows() != n || spec_.covariance.cols() != n)
    throw Error("GaussianSpec: covariance must be " + std::to_string(d_) + "x" + std::to_string(d_));
  if (!spec_.mean.allFinite() || !spec_.covariance.allFinite())
    throw Error("GaussianSpec: non-finite mean or covariance");
  if ((spec_.covariance - spec_.covariance.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, spec_.covariance.cwiseAbs().maxCoeff()))
    throw Error("GaussianSpec: covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(spec_.covariance, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw Error("GaussianSpec: covariance is not positive definite (" + spec_.describe() + ")");

  Eigen::LLT<Eigen::MatrixXd> llt(spec_.covariance);
  Eigen::MatrixXd L = llt.matrixL();
  chol_.assign(d_ * d_, 0.0);
  double log_det_l = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = 0; j <= i; ++j)
      chol_[i * d_ + j] = L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    log_det_l += std::log(chol_[i * d_ + i]);
  }
  log_norm_ = -0.5 * static_cast<double>(d_) * std::log(2.0 * std::numbers::pi) - log_det_l;

  diagonal_ = true;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && spec_.covariance(i, j) != 0.0) diagonal_ = false;

  if (!spec_.truncation) return;
  const Box& box = *spec_.truncation;
  if (box.dim() != d_ || box.upper.size() != d_)
    throw Error("GaussianSpec: truncation box dimension mismatch");
  for (std::size_t j = 0; j < d_; ++j)
    if (!(box.upper[j] > box.lower[j]))
      throw Error("GaussianSpec: truncation box has zero volume (" + spec_.describe() + ")");

  if (diagonal_) {
    double mass = 1.0;
    for (std::size_t j = 0; j < d_; ++j) {
      double sd = std::sqrt(spec_.covariance(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
      double mu = spec_.mean[static_cast<Eigen::Index>(j)];
      mass *= normal_cdf((box.upper[j] - mu) / sd) - normal_cdf((box.lower[j] - mu) / sd);
    }
    box_mass_ = mass;
  } else {
    Rng rng(Seed{0x626f786d617373ULL, static_cast<std::uint64_t>(Stream::box_mass)});
    std::vector<double> x(d_);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < kBoxMassDraws; ++i) {
      draw_untruncated(rng, x);
      if (box.contains(x)) ++inside;
    }
    box_mass_ = static_cast<double>(inside) / static_cast<double>(kBoxMassDraws);
  }
  if (!(box_mass_ >= kMinAcceptance))
    throw Error("GaussianSpec: rejection acceptance rate " + std::to_string(box_mass_) +
                " is below 1e-6 for " + spec_.describe());
  box_mass_ = std::min(box_mass_, 1.0);
  log_box_mass_ = std::log(box_mass_);
}

double GaussianModel::untruncated_log_density(std::span<const double> x) const {
  // Solve L z = x - mu by forward substitution; quadratic form is |z|^2.
  double buf[16];
  std::vector<double> heap;
  double* z = buf;
  if (d_ > 16) {
    heap.resize(d_);
    z = heap.data();
  }
  double q = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    double s = x[i] - spec_.mean[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j < i; ++j) s -= chol_[i * d_ + j] * z[j];
    z[i] = s / chol_[i * d_ + i];
    q += z[i] * z[i];
  }
  return log_norm_ - 0.5 * q;
}

double GaussianModel::density_at(std::span<const double> x) const {
  if (x.size() != d_)
    throw Error("density_at: point has dimension " + std::to_string(x.size()) + ", density has " +
                std::to_string(d_));
  if (spec_.truncation && !spec_.truncation->contains(x)) return 0.0;
  return std::exp(untruncated_log_density(x) - log_box_mass_);
}

void GaussianModel::draw_untruncated(Rng& rng, std::span<double> out) const {
  double buf[16];
  std::vector<double> heap;
  double* z = buf;
  if (d_ > 16) {
    heap.resize(d_);
    z = heap.data();
  }
  for (std::size_t i = 0; i < d_; ++i) z[i] = rng.normal();
  for (std::size_t i = 0; i < d_; ++i) {
    double s = spec_.mean[static_cast<Eigen::Index>(i)];
    for (std::size_t j = 0; j <= i; ++j) s += chol_[i * d_ + j] * z[j];
    out[i] = s;
  }
}

void GaussianModel::draw(Rng& rng, std::span<double> out) const {
  if (!spec_.truncation) {
    draw_untruncated(rng, out);
    return;
  }
  // Acceptance >= 1e-6 is checked at construction; the cap only guards
  // against an estimate of the box mass that was badly optimistic.
  const std::size_t cap = static_cast<std::size_t>(1e3 / kMinAcceptance);
  if (diagonal_) {
    // Independent coordinates: rejecting each one separately gives the same
    // joint law as rejecting whole vectors.
    const Box& box = *spec_.truncation;
    for (std::size_t j = 0; j < d_; ++j) {
      const double sd = chol_[j * d_ + j];
      std::size_t attempt = 0;
      do {
        if (++attempt > cap) throw Error("sample: rejection sampling made no progress for " + spec_.describe());
        out[j] = spec_.mean[static_cast<Eigen::Index>(j)] + sd * rng.normal();
      } while (!(out[j] >= box.lower[j] && out[j] <= box.upper[j]));
    }
    return;
  }
  for (std::size_t attempt = 0; attempt < cap; ++attempt) {
    draw_untruncated(rng, out);
    if (spec_.truncation->contains(out)) return;
  }
  throw Error("sample: rejection sampling made no progress for " + spec_.describe());
}

SampleSet GaussianModel::sample(std::size_t n, Seed seed) const {
  if (n == 0) throw Error("sample: n must be at least 1");
  Rng rng(seed);
  std::vector<double> values(n * d_);
  for (std::size_t i = 0; i < n; ++i) draw(rng, std::span<double>(values.data() + i * d_, d_));
  return SampleSet(d_, std::move(values), spec_.describe(), seed);
}

SampleSet sample(const GaussianSpec& spec, std::size_t n, Seed seed) {
  return GaussianModel(spec).sample(n, seed);
}

double density_at(const GaussianSpec& spec, std::span<const double> x) {
  return GaussianModel(spec).density_at(x);
}

double gaussian_renyi_integral(const GaussianSpec& f1, const GaussianSpec& f2, double alpha) {
  if (f1.dim() != f2.dim()) throw Error("gaussian_renyi_integral: dimension mismatch");
  Eigen::MatrixXd sa = (1.0 - alpha) * f1.covariance + alpha * f2.covariance;
  Eigen::LLT<Eigen::MatrixXd> llt(sa);
  if (llt.info() != Eigen::Success)
    throw Error("gaussian_renyi_integral: (1-alpha) S1 + alpha S2 is not positive definite");
  Eigen::VectorXd dmu = f1.mean - f2.mean;
  double quad = dmu.dot(llt.solve(dmu));
  auto logdet = [](const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> c(m);
    Eigen::MatrixXd l = c.matrixL();
    return 2.0 * l.diagonal().array().log().sum();
  };
  double log_value = 0.5 * (1.0 - alpha) * logdet(f1.covariance) + 0.5 * alpha * logdet(f2.covariance) -
                     0.5 * logdet(sa) - 0.5 * alpha * (1.0 - alpha) * quad;
  return std::exp(log_value);
}

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double v) {
    n += 1.0;
    double delta = v - mean;
    mean += delta / n;
    m2 += delta * (v - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0.0) return;
    double total = n + o.n;
    double delta = o.mean - mean;
    mean += delta * o.n / total;
    m2 += o.m2 + delta * delta * n * o.n / total;
    n = total;
  }
};

}  // namespace

OracleResult true_divergence(const GaussianSpec& f1, const GaussianSpec& f2, const GFunctional& g,
                             std::size_t mc_budget, Seed seed, unsigned threads) {
  if (f1.dim() != f2.dim()) throw Error("true_divergence: f1 and f2 have different dimensions");
  if (f1.truncation != f2.truncation)
    throw Error("true_divergence: f1 and f2 must share the same truncation box");
  if (mc_budget < kMinOracleBudget) throw Error("true_divergence: mc_budget must be at least 1e5");

  GaussianModel m1(f1);
  GaussianModel m2(f2);
  const std::size_t d = m2.dim();
  std::vector<Moments> chunks(kOracleChunks);
  std::vector<std::string> failures(kOracleChunks);

  auto run_chunk = [&](std::size_t c) {
    std::size_t n = mc_budget / kOracleChunks + (c < mc_budget % kOracleChunks ? 1 : 0);
    Rng rng(seed.derive({c}));
    std::vector<double> x(d);
    Moments mom;
    for (std::size_t i = 0; i < n; ++i) {
      m2.draw(rng, x);
      double p2 = m2.density_at(x);
      double p1 = m1.density_at(x);
      double ratio = p1 / p2;
      double v = g(ratio);
      if (!(p2 > 0.0) || !std::isfinite(ratio) || !std::isfinite(v)) {
        failures[c] = "true_divergence: density ratio overflow (non-overlapping effective supports?)";
        return;
      }
      mom.add(v);
    }
    chunks[c] = mom;
  };

  unsigned workers = std::max(1u, std::min<unsigned>(threads, kOracleChunks));
  if (workers == 1) {
    for (std::size_t c = 0; c < kOracleChunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < kOracleChunks; c += workers) run_chunk(c);
      });
    for (auto& t : pool) t.join();
  }
  for (const auto& f : failures)
    if (!f.empty()) throw Error(f);

  Moments total;
  for (const auto& c : chunks) total.merge(c);
  OracleResult out;
  out.value = total.mean;
  out.std_error = total.n > 1.0 ? std::sqrt(total.m2 / (total.n - 1.0) / total.n) : 0.0;
  out.budget = mc_budget;

  if (!f1.truncation && g.kind() == GFunctional::Kind::renyi) {
    double cf = gaussian_renyi_integral(f1, f2, g.alpha());
    out.closed_form = cf;
    double tol = 4.0 * out.std_error + 1e-12 * std::abs(cf);
    if (std::abs(out.value - cf) > tol)
      throw Error("true_divergence: Monte Carlo value " + std::to_string(out.value) +
                  " disagrees with the closed form " + std::to_string(cf) + " by more than 4 std errors");
  }
  return out;
}

}  // namespace divest
