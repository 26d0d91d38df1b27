#include <algorithm>
#include <cmath>

#include "divest/error.hpp"
#include "divest/rng.hpp"
#include "divest/spatial.hpp"
#include "doctest.h"

using namespace divest;

namespace {

SampleSet uniform_points(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng r(Seed{seed, 0});
  std::vector<double> v(n * d);
  for (auto& x : v) x = r.uniform();
  return SampleSet(d, std::move(v));
}

}  // namespace

TEST_CASE("hand-enumerable distances") {
  SampleSet line(1, {0.0, 1.0, 2.0});
  NeighborIndex idx(line);
  std::vector<double> q{0.0};
  CHECK(idx.kth_distance(q, 1) == 0.0);
  CHECK(idx.kth_distance(q, 2) == 1.0);
  CHECK(idx.kth_distance(q, 3) == 2.0);

  SampleSet tri(2, {0.0, 0.0, 3.0, 4.0});
  NeighborIndex t(tri);
  std::vector<double> o{0.0, 0.0};
  CHECK(t.kth_distance(o, 2) == 5.0);
}

TEST_CASE("k outside [1, M] and empty input are errors") {
  SampleSet line(1, {0.0, 1.0});
  NeighborIndex idx(line);
  std::vector<double> q{0.0};
  CHECK_THROWS_AS(idx.kth_distance(q, 3), Error);
  CHECK_THROWS_AS(idx.kth_distance(q, 0), Error);
  CHECK_THROWS_AS(NeighborIndex(SampleSet{}), Error);
  std::vector<double> bad{0.0, 0.0};
  CHECK_THROWS_AS(idx.kth_distance(bad, 1), Error);
}

TEST_CASE("duplicates give zero distances") {
  SampleSet dup(2, {0.5, 0.5, 0.5, 0.5, 0.1, 0.1});
  NeighborIndex idx(dup);
  std::vector<double> q{0.5, 0.5};
  CHECK(idx.kth_distance(q, 2) == 0.0);
  CHECK(idx.kth_distance(q, 3) > 0.0);
}

TEST_CASE("kd-tree equals brute force on 1000 uniform points") {
  for (std::size_t d : {1u, 2u, 5u, 8u}) {
    auto pts = uniform_points(1000, d, d);
    auto qs = uniform_points(50, d, 100 + d);
    NeighborIndex tree(pts);
    NeighborIndex brute(pts, NeighborIndex::Method::brute_force);
    for (std::size_t i = 0; i < qs.rows(); ++i)
      for (std::size_t k : {1u, 10u, 100u}) {
        double a = tree.kth_distance(qs.row(i), k);
        CHECK(a == brute.kth_distance(qs.row(i), k));
        CHECK(a == brute_force_kth_distance(pts, qs.row(i), k));
      }
  }
}

TEST_CASE("nearest distances are sorted and consistent with counts") {
  auto pts = uniform_points(500, 3, 4);
  NeighborIndex idx(pts);
  std::vector<double> q{0.5, 0.5, 0.5};
  auto d = idx.nearest_distances(q, 20);
  CHECK(std::is_sorted(d.begin(), d.end()));
  CHECK(d[19] == idx.kth_distance(q, 20));
  CHECK(idx.count_within(q, d[19]) >= 20);
  CHECK(idx.count_within(q, std::nextafter(d[19], 0.0)) < 20);
}

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0));
  CHECK(unit_ball_volume(2) == doctest::Approx(M_PI));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * M_PI / 3.0));
  CHECK(unit_ball_volume(5) == doctest::Approx(8.0 * M_PI * M_PI / 15.0));
}
