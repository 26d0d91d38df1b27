#include <cmath>

#include "divest/distributions.hpp"
#include "divest/ensemble.hpp"
#include "divest/error.hpp"
#include "doctest.h"

using namespace divest;

namespace {

double norm(const std::vector<double>& w) {
  double s = 0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

struct Data {
  SampleSet f1;
  DataSplit split;
};

Data study_data(std::size_t d, std::size_t T, std::uint64_t seed) {
  auto box = Box::cube(d, 0, 1);
  auto f1 = sample(GaussianSpec::isotropic(d, 0.7, 0.1, box), T, Seed{seed, 1});
  auto f2 = sample(GaussianSpec::isotropic(d, 0.3, 0.3, box), T, Seed{seed, 2});
  return {f1, split_f2(f2, 0.5, Seed{seed, 3})};
}

}  // namespace

TEST_CASE("exact weights: hand-solved 2x2 system") {
  auto w = solve_exact_weights(EnsembleSpec({1.0, 4.0}, 2));
  CHECK(w.weights[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w.weights[1] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("exact weights: feasibility on the default index set") {
  for (std::size_t d = 1; d <= 6; ++d) {
    auto w = solve_exact_weights(EnsembleSpec::evenly_spaced(d, 1, 3, 30));
    CHECK(std::abs(w.sum_residual) <= 1e-12);
    CHECK(w.max_abs_residual() <= 1e-10);
    CHECK(w.residuals.size() == d - 1);
  }
}

TEST_CASE("exact weights: d = 1 has only the sum constraint") {
  auto w = solve_exact_weights(EnsembleSpec({1.0, 2.0, 3.0, 4.0}, 1));
  for (double v : w.weights) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("exact weights: minimum norm against nullspace perturbations") {
  EnsembleSpec spec({1, 2, 3, 4, 5}, 3);
  auto w = solve_exact_weights(spec);
  // Constraint rows: ones, l^(1/3), l^(2/3). A nullspace basis via Gram-Schmidt
  // of random vectors against those rows.
  std::vector<std::vector<double>> rows(3, std::vector<double>(5));
  for (int l = 0; l < 5; ++l)
    for (int i = 0; i < 3; ++i) rows[i][l] = std::pow(l + 1.0, i / 3.0);
  std::vector<std::vector<double>> basis;
  auto orth = [&](std::vector<double> v) {
    for (const auto& b : basis) {
      double p = 0, bb = 0;
      for (int l = 0; l < 5; ++l) p += v[l] * b[l], bb += b[l] * b[l];
      for (int l = 0; l < 5; ++l) v[l] -= p / bb * b[l];
    }
    return v;
  };
  for (const auto& row : rows) basis.push_back(orth(row));
  Rng r(Seed{11, 0});
  std::vector<std::vector<double>> null;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> v(5);
    for (auto& x : v) x = r.normal();
    v = orth(v);
    basis.push_back(v);
    null.push_back(v);
  }
  const double n0 = norm(w.weights);
  for (int t = 0; t < 10000; ++t) {
    double scale = std::pow(10.0, -6 + 6 * r.uniform());
    std::vector<double> p = w.weights;
    for (const auto& b : null) {
      double c = scale * r.normal();
      for (int l = 0; l < 5; ++l) p[l] += c * b[l];
    }
    REQUIRE(norm(p) - n0 >= -1e-9);
  }
}

TEST_CASE("exact weights depend only on the index set") {
  auto spec = EnsembleSpec::evenly_spaced(4, 1, 3, 20);
  CHECK(solve_exact_weights(spec).weights == solve_exact_weights(spec).weights);
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(EnsembleSpec({1.0, 2.0}, 3), Error);
  CHECK_THROWS_AS(EnsembleSpec({2.0, 1.0, 3.0}, 2), Error);
  CHECK_THROWS_AS(EnsembleSpec({1.0, 1.0, 3.0}, 2), Error);
  CHECK_THROWS_AS(EnsembleSpec({0.0, 1.0, 3.0}, 2), Error);
  auto s = EnsembleSpec::evenly_spaced(5, 1, 3, 30);
  auto k = s.k_values(1500, 1500);
  CHECK(k.front() == 39);
  CHECK(k.back() == 116);
  CHECK_THROWS_AS(s.k_values(100, 1500), Error);
  CHECK(EnsembleSpec({0.01, 1.0}, 1).k_values(100, 100).front() == 1);
}

TEST_CASE("relaxed weights: large eta reaches epsilon zero") {
  auto spec = EnsembleSpec::evenly_spaced(4, 1, 3, 30);
  auto exact = solve_exact_weights(spec);
  auto w = solve_relaxed_weights(spec, 1000, 10 * exact.norm);
  CHECK(w.epsilon <= 1e-6);
  CHECK(w.max_abs_residual() <= 1e-6);
}

TEST_CASE("relaxed weights: eta = 1/sqrt(L) forces uniform weights") {
  auto spec = EnsembleSpec::evenly_spaced(3, 1, 3, 16);
  auto w = solve_relaxed_weights(spec, 500, 0.25);
  for (double v : w.weights) CHECK(v == doctest::Approx(1.0 / 16).epsilon(1e-6));
  CHECK_THROWS_AS(solve_relaxed_weights(spec, 500, 0.24), Error);
}

TEST_CASE("relaxed weights: eta above the exact norm does no worse than exact") {
  std::vector<double> l{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EnsembleSpec spec(l, 5);
  auto exact = solve_exact_weights(spec);
  auto w = solve_relaxed_weights(spec, 3000, 3 * exact.norm);
  CHECK(w.epsilon <= 1e-6);
}

TEST_CASE("relaxed weights: certificate fields") {
  auto spec = EnsembleSpec::evenly_spaced(5, 1, 3, 30);
  for (std::size_t T : {400u, 3000u}) {
    auto w = solve_relaxed_weights(spec, T, 2.0);
    CHECK(std::abs(w.sum_residual) <= 1e-12);
    CHECK(w.norm <= 2.0 * (1 + 1e-8));
    CHECK(w.epsilon - w.epsilon_lower_bound <= 1e-6);
    CHECK(w.epsilon_lower_bound <= w.epsilon);
  }
}

TEST_CASE("ensemble: single member equals the plug-in") {
  auto data = study_data(1, 800, 1);
  EnsembleSpec spec({1.0}, 1);
  auto w = solve_exact_weights(spec);
  REQUIRE(w.weights == std::vector<double>{1.0});
  auto g = GFunctional::renyi(0.8);
  auto e = ensemble_estimate(data.split.eval, data.split.reference, data.f1, spec, w, g);
  std::size_t k = spec.k_values(800, 400)[0];
  CHECK(k == 20);
  auto p = plugin_estimate(data.split.eval, data.split.reference, data.f1, k, k, g);
  CHECK(e.combined.functional == p.functional);
}

TEST_CASE("ensemble: constant g gives exactly one") {
  auto data = study_data(5, 1000, 2);
  auto spec = EnsembleSpec::evenly_spaced(5, 1, 3, 30);
  auto w = solve_relaxed_weights(spec, 1000, 2.0);
  auto e = ensemble_estimate(data.split.eval, data.split.reference, data.f1, spec, w, GFunctional::one());
  CHECK(e.combined.functional == 1.0);
}

TEST_CASE("ensemble: linear in the weights") {
  auto data = study_data(4, 1200, 3);
  auto spec = EnsembleSpec::evenly_spaced(4, 1, 3, 30);
  auto w1 = solve_relaxed_weights(spec, 1200, 2.0);
  auto w2 = solve_relaxed_weights(spec, 1200, 5.0);
  const double a = 0.3;
  WeightVector mix;
  for (std::size_t l = 0; l < spec.size(); ++l) mix.weights.push_back(a * w1.weights[l] + (1 - a) * w2.weights[l]);
  auto g = GFunctional::renyi(0.8);
  auto run = [&](const WeightVector& w) {
    return ensemble_estimate(data.split.eval, data.split.reference, data.f1, spec, w, g).combined.functional;
  };
  CHECK(run(mix) == doctest::Approx(a * run(w1) + (1 - a) * run(w2)).epsilon(1e-12));
}

TEST_CASE("ensemble: k beyond M is an error before estimation") {
  auto data = study_data(2, 40, 4);
  EnsembleSpec spec({1, 2, 5}, 2);
  WeightVector w;
  w.weights = {0.2, 0.3, 0.5};
  CHECK_THROWS_AS(ensemble_estimate(data.split.eval, data.split.reference, data.f1, spec, w, GFunctional::kl()),
                  Error);
}
