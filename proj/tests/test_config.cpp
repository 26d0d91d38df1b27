#include "divest/config.hpp"
#include "divest/csv.hpp"
#include "divest/error.hpp"
#include "doctest.h"

#include <sstream>

using namespace divest;

TEST_CASE("defaults describe the truncated study") {
  auto c = ExperimentConfig::truncated_gaussian_study();
  auto s1 = c.f1.resolve(5);
  CHECK(s1.mean(4) == 0.7);
  CHECK(s1.covariance(2, 2) == 0.1);
  CHECK(s1.covariance(0, 1) == 0.0);
  REQUIRE(s1.truncation);
  CHECK(s1.truncation->upper[3] == 1.0);
  CHECK(c.f2.resolve(2).mean(0) == 0.3);
  CHECK(c.functional().alpha() == 0.8);
  CHECK(c.f1_count(3000) == 3000);
}

TEST_CASE("json round trip") {
  auto c = ExperimentConfig::truncated_gaussian_study();
  c.T_grid = {100, 300};
  c.l_set.values = {1.0, 2.0, 3.5};
  c.kernel_bandwidth = BandwidthRule::radius;
  auto back = experiment_config_from_json(to_json(c));
  CHECK(to_json(back) == to_json(c));
}

TEST_CASE("unknown keys are errors at every level") {
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"trails": 3})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"f1": {"mean": 0.1, "sigma": 1}})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"l_set": {"lo": 1}})")), Error);
}

TEST_CASE("invalid values are errors") {
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"trials": 0})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"T_grid": []})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"alpha_frac": 1.0})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"estimators": ["nn"]})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"g": "renyi:1"})")), Error);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"oracle_budget": 10})")), Error);
}

TEST_CASE("explicit vectors and matrices") {
  auto j = Json::parse(R"({"mean": [0.1, 0.2], "covariance": [[1.0, 0.5], [0.5, 2.0]], "truncation": null})");
  auto t = gaussian_template_from_json(j);
  auto s = t.resolve(2);
  CHECK(s.covariance(0, 1) == 0.5);
  CHECK(!s.truncation);
  CHECK_THROWS_AS(t.resolve(3), Error);
}

TEST_CASE("estimators keep canonical order") {
  auto c = experiment_config_from_json(Json::parse(R"({"estimators": ["ensemble_relaxed", "knn_plugin"]})"));
  REQUIRE(c.estimators.size() == 2);
  CHECK(c.estimators[0] == EstimatorKind::knn_plugin);
  CHECK_THROWS_AS(experiment_config_from_json(Json::parse(R"({"estimators": ["knn_plugin", "knn_plugin"]})")),
                  Error);
}

TEST_CASE("points csv") {
  std::istringstream in("a,b\n0.5,1\n\n2,3e-1\n");
  auto s = parse_points_csv(in, "mem");
  CHECK(s.rows() == 2);
  CHECK(s.dim() == 2);
  CHECK(s.row(1)[1] == 0.3);
  std::istringstream ragged("1,2\n3\n");
  CHECK_THROWS_AS(parse_points_csv(ragged, "mem"), Error);
  std::istringstream junk("1,2\nx,y\n");
  CHECK_THROWS_AS(parse_points_csv(junk, "mem"), Error);
  std::istringstream empty("x\n");
  CHECK_THROWS_AS(parse_points_csv(empty, "mem"), Error);
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(format_double(0.1) == "0.10000000000000001");
}
