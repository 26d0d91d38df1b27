#include <cmath>

#include "divest/distributions.hpp"
#include "divest/error.hpp"
#include "doctest.h"

using namespace divest;

namespace {

GaussianSpec study(std::size_t d, double m, double v, bool truncated = true) {
  return GaussianSpec::isotropic(d, m, v, truncated ? std::optional<Box>(Box::cube(d, 0, 1)) : std::nullopt);
}

}  // namespace

TEST_CASE("samples are deterministic and inside the box") {
  auto s = study(3, 0.3, 0.3);
  auto a = sample(s, 1000, Seed{5, 2});
  auto b = sample(s, 1000, Seed{5, 2});
  CHECK(a == b);
  CHECK(a.rows() == 1000);
  for (double v : a.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(!(a == sample(s, 1000, Seed{6, 2})));
}

TEST_CASE("truncated marginal mean matches the closed form") {
  // Mean of N(0.3, 0.3) truncated to [0,1].
  const double mu = 0.3, sd = std::sqrt(0.3);
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); };
  double a = (0 - mu) / sd, b = (1 - mu) / sd;
  double expected = mu + sd * (phi(a) - phi(b)) / (normal_cdf(b) - normal_cdf(a));
  auto x = sample(study(2, mu, 0.3), 200000, Seed{9, 0});
  double m = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) m += x.row(i)[1];
  CHECK(std::abs(m / static_cast<double>(x.rows()) - expected) < 0.004);
}

TEST_CASE("correlated truncation uses joint rejection") {
  GaussianSpec s;
  s.mean = Eigen::Vector2d(0.5, 0.5);
  s.covariance.resize(2, 2);
  s.covariance << 0.2, 0.15, 0.15, 0.2;
  s.truncation = Box::cube(2, 0, 1);
  GaussianModel m(s);
  CHECK(!m.diagonal());
  auto x = m.sample(5000, Seed{1, 0});
  double cov = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) cov += (x.row(i)[0] - 0.5) * (x.row(i)[1] - 0.5);
  CHECK(cov / 5000 > 0.02);
}

TEST_CASE("density integrates to one over the box") {
  for (std::size_t d = 1; d <= 3; ++d) {
    GaussianModel m(study(d, 0.7, 0.1));
    Rng r(Seed{d, 0});
    std::vector<double> x(d);
    double s = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      for (auto& v : x) v = r.uniform();
      s += m.density_at(x);
    }
    CHECK(s / n == doctest::Approx(1.0).epsilon(0.01));
  }
}

TEST_CASE("density is zero outside the box and rejects wrong dimension") {
  GaussianModel m(study(2, 0.5, 0.1));
  std::vector<double> out{1.5, 0.5};
  CHECK(m.density_at(out) == 0.0);
  std::vector<double> bad{0.5};
  CHECK_THROWS_AS(m.density_at(bad), Error);
}

TEST_CASE("invalid specs are errors") {
  GaussianSpec s = study(2, 0.5, 0.1);
  s.covariance(0, 1) = 0.5;
  CHECK_THROWS_AS(GaussianModel{s}, Error);  // not symmetric
  s.covariance(1, 0) = 0.5;
  CHECK_THROWS_AS(GaussianModel{s}, Error);  // not positive definite
  CHECK_THROWS_AS(GaussianModel(GaussianSpec::isotropic(2, 50.0, 0.01, Box::cube(2, 0, 1))), Error);
  CHECK_THROWS_AS(sample(study(2, 0.5, 0.1), 0, Seed{}), Error);
}

TEST_CASE("oracle: f1 = f2 gives exactly the identity values") {
  auto s = study(3, 0.4, 0.2);
  auto r = true_divergence(s, s, GFunctional::renyi(0.8), 100000, Seed{1, 5});
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  auto k = true_divergence(s, s, GFunctional::kl(), 100000, Seed{1, 5});
  CHECK(std::abs(k.value) < 1e-12);
}

TEST_CASE("oracle matches the closed form when untruncated") {
  auto f1 = study(5, 0.7, 0.1, false), f2 = study(5, 0.3, 0.3, false);
  auto r = true_divergence(f1, f2, GFunctional::renyi(0.8), 200000, Seed{2, 5});
  REQUIRE(r.closed_form);
  CHECK(std::abs(r.value - *r.closed_form) < 4 * r.std_error);
}

TEST_CASE("oracle is thread-count independent and budget stable") {
  auto f1 = study(2, 0.7, 0.1), f2 = study(2, 0.3, 0.3);
  auto g = GFunctional::renyi(0.8);
  auto a = true_divergence(f1, f2, g, 200000, Seed{3, 5}, 1);
  auto b = true_divergence(f1, f2, g, 200000, Seed{3, 5}, 3);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  auto c = true_divergence(f1, f2, g, 1000000, Seed{4, 5}, 2);
  CHECK(std::abs(a.value - c.value) < 3 * std::hypot(a.std_error, c.std_error));
}

TEST_CASE("oracle preconditions") {
  auto f1 = study(2, 0.7, 0.1), f2 = study(3, 0.3, 0.3);
  CHECK_THROWS_AS(true_divergence(f1, f2, GFunctional::kl(), 100000, Seed{}), Error);
  CHECK_THROWS_AS(true_divergence(f1, f1, GFunctional::kl(), 1000, Seed{}), Error);
}
