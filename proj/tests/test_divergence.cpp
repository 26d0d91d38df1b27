#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "divest/distributions.hpp"
#include "divest/divergence.hpp"
#include "divest/error.hpp"
#include "doctest.h"

using namespace divest;

namespace {

SampleSet draw(std::size_t n, std::size_t d, double m, double v, std::uint64_t seed) {
  return sample(GaussianSpec::isotropic(d, m, v, Box::cube(d, 0, 1)), n, Seed{seed, 1});
}

SampleSet permuted(const SampleSet& s, std::uint64_t seed) {
  std::vector<std::size_t> p(s.rows());
  std::iota(p.begin(), p.end(), std::size_t{0});
  Rng r(Seed{seed, 0});
  for (std::size_t i = p.size() - 1; i > 0; --i) std::swap(p[i], p[r.below(i + 1)]);
  return s.select(p);
}

}  // namespace

TEST_CASE("functional parsing and post transform") {
  auto r = GFunctional::parse("renyi:0.8");
  CHECK(r.kind() == GFunctional::Kind::renyi);
  CHECK(r(4.0) == doctest::Approx(std::pow(4.0, 0.8)));
  CHECK(r.to_divergence(std::exp(-0.2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(r.to_divergence(0.0), Error);
  auto kl = GFunctional::parse("kl");
  CHECK(kl(1.0) == 0.0);
  CHECK(kl.to_divergence(0.3) == 0.3);
  CHECK(GFunctional::parse("custom:one")(123.0) == 1.0);
  CHECK_THROWS_AS(GFunctional::parse("renyi:1"), Error);
  CHECK_THROWS_AS(GFunctional::parse("renyi:-2"), Error);
  CHECK_THROWS_AS(GFunctional::parse("hellinger"), Error);
}

TEST_CASE("split sizes, disjointness and determinism") {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 0.0);
  SampleSet s(1, v);
  auto a = split_f2(s, 0.5, Seed{1, 3});
  CHECK(a.eval.rows() == 5);
  CHECK(a.reference.rows() == 5);
  std::set<double> all(a.eval.values().begin(), a.eval.values().end());
  all.insert(a.reference.values().begin(), a.reference.values().end());
  CHECK(all.size() == 10);
  auto b = split_f2(s, 0.5, Seed{1, 3});
  CHECK(a.eval == b.eval);
  CHECK(a.reference == b.reference);

  auto big = draw(3000, 2, 0.5, 0.1, 1);
  auto c = split_f2(big, 0.5, Seed{2, 3});
  CHECK(c.eval.rows() == 1500);
  CHECK(c.reference.rows() == 1500);
  CHECK_THROWS_AS(split_f2(SampleSet(1, {1.0}), 0.5, Seed{}), Error);
  CHECK_THROWS_AS(split_f2(s, 0.01, Seed{}), Error);
  CHECK_THROWS_AS(split_f2(s, 1.0, Seed{}), Error);
}

TEST_CASE("round half up") {
  CHECK(round_half_up(2.5, 1, 10) == 3);
  CHECK(round_half_up(2.49, 1, 10) == 2);
  CHECK(round_half_up(0.2, 1, 10) == 1);
  CHECK(round_half_up(12.0, 1, 10) == 10);
  CHECK(default_plugin_k(1500) == 39);
}

TEST_CASE("constant g gives exactly one") {
  auto f1 = draw(400, 3, 0.7, 0.1, 1);
  auto sp = split_f2(draw(400, 3, 0.3, 0.3, 2), 0.5, Seed{3, 3});
  CHECK(plugin_estimate(sp.eval, sp.reference, f1, 5, 7, GFunctional::one()).functional == 1.0);
  KernelPluginOptions opt{5, 7, BandwidthRule::volume_matched, Box::cube(3, 0, 1), Seed{1, 4}};
  CHECK(plugin_estimate_kernel(sp.eval, sp.reference, f1, opt, GFunctional::one()).functional == 1.0);
}

TEST_CASE("permutation invariance is bitwise") {
  auto f1 = draw(500, 2, 0.7, 0.1, 4);
  auto sp = split_f2(draw(600, 2, 0.3, 0.3, 5), 0.5, Seed{6, 3});
  auto g = GFunctional::renyi(0.8);
  auto a = plugin_estimate(sp.eval, sp.reference, f1, 10, 12, g);
  auto b = plugin_estimate(permuted(sp.eval, 1), permuted(sp.reference, 2), permuted(f1, 3), 10, 12, g);
  CHECK(a.functional == b.functional);
  CHECK(a.divergence == b.divergence);
}

TEST_CASE("linearity in g") {
  auto f1 = draw(500, 2, 0.7, 0.1, 7);
  auto sp = split_f2(draw(600, 2, 0.3, 0.3, 8), 0.5, Seed{9, 3});
  auto g1 = GFunctional::renyi(0.8);
  auto g2 = GFunctional::kl();
  auto mix = GFunctional::custom("mix", [&](double x) { return 2.0 * g1(x) - 0.5 * g2(x); });
  double a = plugin_estimate(sp.eval, sp.reference, f1, 9, 9, g1).functional;
  double b = plugin_estimate(sp.eval, sp.reference, f1, 9, 9, g2).functional;
  double c = plugin_estimate(sp.eval, sp.reference, f1, 9, 9, mix).functional;
  CHECK(c == doctest::Approx(2 * a - 0.5 * b).epsilon(1e-12));
}

TEST_CASE("f1 = f2: Renyi plug-in near one over 20 trials") {
  double sum = 0;
  auto g = GFunctional::renyi(0.8);
  for (int t = 0; t < 20; ++t) {
    auto f1 = draw(2000, 3, 0.5, 0.2, 100 + t);
    auto sp = split_f2(draw(2000, 3, 0.5, 0.2, 200 + t), 0.5, Seed{300u + t, 3});
    sum += plugin_estimate(sp.eval, sp.reference, f1, default_plugin_k(2000), default_plugin_k(1000), g).functional;
  }
  CHECK(std::abs(sum / 20 - 1.0) < 0.05);
}

TEST_CASE("f1 = f2: kernel KL near zero") {
  double sum = 0;
  auto g = GFunctional::kl();
  for (int t = 0; t < 20; ++t) {
    auto f1 = draw(2000, 2, 0.5, 0.2, 400 + t);
    auto sp = split_f2(draw(2000, 2, 0.5, 0.2, 500 + t), 0.5, Seed{600u + t, 3});
    KernelPluginOptions opt{default_plugin_k(2000), default_plugin_k(1000), BandwidthRule::volume_matched,
                            Box::cube(2, 0, 1), Seed{1, 4}};
    sum += plugin_estimate_kernel(sp.eval, sp.reference, f1, opt, g).functional;
  }
  CHECK(std::abs(sum / 20) < 0.1);
}

TEST_CASE("plug-in errors") {
  auto f1 = draw(50, 2, 0.7, 0.1, 1);
  auto sp = split_f2(draw(50, 2, 0.3, 0.3, 2), 0.5, Seed{3, 3});
  auto g = GFunctional::renyi(0.8);
  CHECK_THROWS_AS(plugin_estimate(sp.eval, sp.reference, f1, 51, 3, g), Error);
  CHECK_THROWS_AS(plugin_estimate(sp.eval, sp.reference, f1, 3, 26, g), Error);
  auto f3 = draw(50, 3, 0.7, 0.1, 1);
  CHECK_THROWS_AS(plugin_estimate(sp.eval, sp.reference, f3, 3, 3, g), Error);
  // Duplicated reference points make the k-NN radius zero.
  SampleSet dup(2, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  SampleSet ev(2, {0.5, 0.5});
  CHECK_THROWS_AS(plugin_estimate(ev, dup, dup, 1, 1, g), Error);
}

TEST_CASE("kernel: empty f2 ball fails Renyi but not constant g") {
  SampleSet f1(1, {0.1, 0.12, 0.14});
  SampleSet ref(1, {0.9, 0.92});
  SampleSet ev(1, {0.1});
  KernelPluginOptions opt{1, 1, BandwidthRule::radius, Box::cube(1, 0, 1), Seed{1, 4}};
  CHECK_THROWS_AS(plugin_estimate_kernel(ev, ref, f1, opt, GFunctional::renyi(0.8)), Error);
  CHECK(plugin_estimate_kernel(ev, ref, f1, opt, GFunctional::one()).functional == 1.0);
}
