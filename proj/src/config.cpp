#include "divest/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "divest/error.hpp"

namespace divest {

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw Error(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + "." + key + ": " + e.what());
  }
}

std::vector<double> scalar_or_vector(const Json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> v;
    for (const auto& x : j) {
      if (!x.is_number()) throw Error(where + ": expected numbers");
      v.push_back(x.get<double>());
    }
    if (v.empty()) throw Error(where + ": empty array");
    return v;
  }
  throw Error(where + ": expected a number or an array of numbers");
}

Json vector_or_scalar(const std::vector<double>& v) {
  if (v.size() == 1) return v[0];
  return Json(v);
}

std::vector<double> broadcast(const std::vector<double>& v, std::size_t d, const char* what) {
  if (v.size() == 1) return std::vector<double>(d, v[0]);
  if (v.size() != d)
    throw Error(std::string(what) + " has length " + std::to_string(v.size()) + " but d = " +
                std::to_string(d));
  return v;
}

}  // namespace

const std::vector<EstimatorKind>& all_estimators() {
  static const std::vector<EstimatorKind> all{EstimatorKind::knn_plugin, EstimatorKind::kernel_plugin,
                                              EstimatorKind::ensemble_exact,
                                              EstimatorKind::ensemble_relaxed};
  return all;
}

std::string to_string(EstimatorKind e) {
  switch (e) {
    case EstimatorKind::knn_plugin: return "knn_plugin";
    case EstimatorKind::kernel_plugin: return "kernel_plugin";
    case EstimatorKind::ensemble_exact: return "ensemble_exact";
    case EstimatorKind::ensemble_relaxed: return "ensemble_relaxed";
  }
  return "?";
}

EstimatorKind parse_estimator(const std::string& name) {
  for (EstimatorKind e : all_estimators())
    if (to_string(e) == name) return e;
  throw Error("unknown estimator '" + name +
              "' (expected knn_plugin, kernel_plugin, ensemble_exact or ensemble_relaxed)");
}

std::string to_string(BandwidthRule r) {
  return r == BandwidthRule::volume_matched ? "volume_matched" : "radius";
}

BandwidthRule parse_bandwidth_rule(const std::string& name) {
  if (name == "volume_matched") return BandwidthRule::volume_matched;
  if (name == "radius") return BandwidthRule::radius;
  throw Error("unknown kernel bandwidth rule '" + name + "' (expected volume_matched or radius)");
}

GaussianSpec GaussianTemplate::resolve(std::size_t d) const {
  if (d == 0) throw Error("dimension must be at least 1");
  GaussianSpec s;
  auto m = broadcast(mean, d, "mean");
  s.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(d));
  if (covariance.size() == 1 && covariance[0].size() == 1) {
    s.covariance = covariance[0][0] * Eigen::MatrixXd::Identity(d, d);
  } else {
    if (covariance.size() != d)
      throw Error("covariance has " + std::to_string(covariance.size()) + " rows but d = " +
                  std::to_string(d));
    s.covariance.resize(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      if (covariance[i].size() != d) throw Error("covariance row length differs from d");
      for (std::size_t j = 0; j < d; ++j) s.covariance(i, j) = covariance[i][j];
    }
  }
  if (truncated) s.truncation = Box{broadcast(lower, d, "truncation.lower"), broadcast(upper, d, "truncation.upper")};
  return s;
}

EnsembleSpec IndexSetConfig::resolve(std::size_t d) const {
  if (!values.empty()) return EnsembleSpec(values, d);
  return EnsembleSpec::evenly_spaced(d, l_min, l_max, count);
}

ExperimentConfig ExperimentConfig::truncated_gaussian_study() {
  ExperimentConfig c;
  c.f1.mean = {0.7};
  c.f1.covariance = {{0.1}};
  c.f1.truncated = true;
  c.f2.mean = {0.3};
  c.f2.covariance = {{0.3}};
  c.f2.truncated = true;
  c.estimators = all_estimators();
  c.T_grid = {100, 200, 400, 700, 1000, 1500, 2000, 3000};
  c.d_grid = {5};
  return c;
}

std::size_t ExperimentConfig::f1_count(std::size_t T) const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(m1_ratio * static_cast<double>(T) + 0.5)));
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error("config: trials must be at least 1");
  if (T_grid.empty()) throw Error("config: T_grid is empty");
  if (d_grid.empty()) throw Error("config: d_grid is empty");
  if (estimators.empty()) throw Error("config: no estimators selected");
  for (auto T : T_grid)
    if (T < 2) throw Error("config: every T must be at least 2");
  for (auto d : d_grid)
    if (d < 1) throw Error("config: every d must be at least 1");
  if (!(alpha_frac > 0.0 && alpha_frac < 1.0)) throw Error("config: alpha_frac must lie in (0, 1)");
  if (!(m1_ratio > 0.0)) throw Error("config: m1_ratio must be positive");
  if (!(eta > 0.0)) throw Error("config: eta must be positive");
  if (!(reference_c > 0.0)) throw Error("config: reference_c must be positive");
  if (oracle_budget < 100'000) throw Error("config: oracle_budget must be at least 1e5");
  if (kernel_ball_draws < 1) throw Error("config: kernel_ball_draws must be positive");
  if (l_set.values.empty() && (l_set.count < 1 || !(l_set.l_min > 0.0) || !(l_set.l_max >= l_set.l_min)))
    throw Error("config: l_set needs count >= 1 and 0 < l_min <= l_max");
  (void)functional();
}

Json to_json(const GaussianTemplate& t) {
  Json j;
  j["mean"] = vector_or_scalar(t.mean);
  if (t.covariance.size() == 1 && t.covariance[0].size() == 1)
    j["covariance"] = t.covariance[0][0];
  else
    j["covariance"] = t.covariance;
  if (t.truncated)
    j["truncation"] = Json{{"lower", vector_or_scalar(t.lower)}, {"upper", vector_or_scalar(t.upper)}};
  else
    j["truncation"] = nullptr;
  return j;
}

GaussianTemplate gaussian_template_from_json(const Json& j) {
  const std::string where = "gaussian";
  reject_unknown(j, {"mean", "covariance", "truncation"}, where);
  GaussianTemplate t;
  if (j.contains("mean")) t.mean = scalar_or_vector(j["mean"], where + ".mean");
  if (j.contains("covariance")) {
    const Json& c = j["covariance"];
    if (c.is_number()) {
      t.covariance = {{c.get<double>()}};
    } else if (c.is_array() && !c.empty()) {
      t.covariance.clear();
      for (const auto& row : c) t.covariance.push_back(scalar_or_vector(row, where + ".covariance"));
    } else {
      throw Error(where + ".covariance: expected a variance or a matrix");
    }
  }
  if (j.contains("truncation") && !j["truncation"].is_null()) {
    const Json& b = j["truncation"];
    reject_unknown(b, {"lower", "upper"}, where + ".truncation");
    t.truncated = true;
    if (b.contains("lower")) t.lower = scalar_or_vector(b["lower"], where + ".truncation.lower");
    if (b.contains("upper")) t.upper = scalar_or_vector(b["upper"], where + ".truncation.upper");
  } else if (j.contains("truncation")) {
    t.truncated = false;
  }
  return t;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["f1"] = to_json(c.f1);
  j["f2"] = to_json(c.f2);
  j["g"] = c.g;
  Json est = Json::array();
  for (auto e : c.estimators) est.push_back(to_string(e));
  j["estimators"] = est;
  j["T_grid"] = c.T_grid;
  j["d_grid"] = c.d_grid;
  j["trials"] = c.trials;
  j["alpha_frac"] = c.alpha_frac;
  j["m1_ratio"] = c.m1_ratio;
  if (c.l_set.values.empty())
    j["l_set"] = Json{{"l_min", c.l_set.l_min}, {"l_max", c.l_set.l_max}, {"count", c.l_set.count}};
  else
    j["l_set"] = Json{{"values", c.l_set.values}};
  j["eta"] = c.eta;
  j["kernel_bandwidth"] = to_string(c.kernel_bandwidth);
  j["kernel_ball_draws"] = c.kernel_ball_draws;
  j["oracle_budget"] = c.oracle_budget;
  j["seed"] = c.seed;
  j["threads"] = c.threads;
  j["record_timing"] = c.record_timing;
  j["reference_c"] = c.reference_c;
  return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  const std::string w = "config";
  reject_unknown(j,
                 {"f1", "f2", "g", "estimators", "T_grid", "d_grid", "trials", "alpha_frac", "m1_ratio",
                  "l_set", "eta", "kernel_bandwidth", "kernel_ball_draws", "oracle_budget", "seed",
                  "threads", "record_timing", "reference_c"},
                 w);
  ExperimentConfig c = ExperimentConfig::truncated_gaussian_study();
  if (j.contains("f1")) c.f1 = gaussian_template_from_json(j["f1"]);
  if (j.contains("f2")) c.f2 = gaussian_template_from_json(j["f2"]);
  if (j.contains("g")) c.g = get<std::string>(j, "g", w);
  if (j.contains("estimators")) {
    c.estimators.clear();
    for (const auto& name : get<std::vector<std::string>>(j, "estimators", w)) {
      EstimatorKind e = parse_estimator(name);
      if (std::find(c.estimators.begin(), c.estimators.end(), e) != c.estimators.end())
        throw Error("config.estimators: '" + name + "' listed twice");
      c.estimators.push_back(e);
    }
    // Records are emitted in canonical estimator order.
    std::vector<EstimatorKind> ordered;
    for (EstimatorKind e : all_estimators())
      if (std::find(c.estimators.begin(), c.estimators.end(), e) != c.estimators.end()) ordered.push_back(e);
    c.estimators = ordered;
  }
  if (j.contains("T_grid")) c.T_grid = get<std::vector<std::size_t>>(j, "T_grid", w);
  if (j.contains("d_grid")) c.d_grid = get<std::vector<std::size_t>>(j, "d_grid", w);
  if (j.contains("trials")) c.trials = get<std::size_t>(j, "trials", w);
  if (j.contains("alpha_frac")) c.alpha_frac = get<double>(j, "alpha_frac", w);
  if (j.contains("m1_ratio")) c.m1_ratio = get<double>(j, "m1_ratio", w);
  if (j.contains("l_set")) {
    const Json& l = j["l_set"];
    reject_unknown(l, {"l_min", "l_max", "count", "values"}, w + ".l_set");
    if (l.contains("values")) {
      if (l.contains("l_min") || l.contains("l_max") || l.contains("count"))
        throw Error("config.l_set: give either values or l_min/l_max/count");
      c.l_set.values = get<std::vector<double>>(l, "values", w + ".l_set");
    }
    if (l.contains("l_min")) c.l_set.l_min = get<double>(l, "l_min", w + ".l_set");
    if (l.contains("l_max")) c.l_set.l_max = get<double>(l, "l_max", w + ".l_set");
    if (l.contains("count")) c.l_set.count = get<std::size_t>(l, "count", w + ".l_set");
  }
  if (j.contains("eta")) c.eta = get<double>(j, "eta", w);
  if (j.contains("kernel_bandwidth"))
    c.kernel_bandwidth = parse_bandwidth_rule(get<std::string>(j, "kernel_bandwidth", w));
  if (j.contains("kernel_ball_draws")) c.kernel_ball_draws = get<std::size_t>(j, "kernel_ball_draws", w);
  if (j.contains("oracle_budget")) c.oracle_budget = get<std::size_t>(j, "oracle_budget", w);
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j, "seed", w);
  if (j.contains("threads")) c.threads = get<unsigned>(j, "threads", w);
  if (j.contains("record_timing")) c.record_timing = get<bool>(j, "record_timing", w);
  if (j.contains("reference_c")) c.reference_c = get<double>(j, "reference_c", w);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("config file '" + path + "': " + e.what());
  }
  return experiment_config_from_json(j);
}

Json to_json(const GaussianSpec& s) {
  Json j;
  j["mean"] = std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size());
  Json cov = Json::array();
  for (Eigen::Index i = 0; i < s.covariance.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < s.covariance.cols(); ++k) row.push_back(s.covariance(i, k));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  if (s.truncation)
    j["truncation"] = Json{{"lower", s.truncation->lower}, {"upper", s.truncation->upper}};
  else
    j["truncation"] = nullptr;
  return j;
}

Json to_json(const WeightVector& w, const EnsembleSpec& spec) {
  Json j;
  j["mode"] = w.mode == WeightVector::Mode::exact ? "exact" : "relaxed";
  j["d"] = spec.dim();
  j["l"] = spec.indices();
  j["weights"] = w.weights;
  j["residuals"] = w.residuals;
  j["sum_residual"] = w.sum_residual;
  j["max_abs_residual"] = w.max_abs_residual();
  j["norm"] = w.norm;
  if (w.mode == WeightVector::Mode::relaxed) {
    j["T"] = w.sample_size;
    j["eta"] = w.eta;
    j["epsilon"] = w.epsilon;
    j["epsilon_lower_bound"] = w.epsilon_lower_bound;
  }
  return j;
}

}  // namespace divest
