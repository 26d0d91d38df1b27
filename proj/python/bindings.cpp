#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divest/config.hpp"
#include "divest/csv.hpp"
#include "divest/density.hpp"
#include "divest/distributions.hpp"
#include "divest/divergence.hpp"
#include "divest/ensemble.hpp"
#include "divest/error.hpp"
#include "divest/harness.hpp"
#include "divest/spatial.hpp"

namespace py = pybind11;
using namespace divest;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SampleSet to_samples(const Array& a) {
  if (a.ndim() == 1) {
    std::vector<double> v(a.data(), a.data() + a.shape(0));
    return SampleSet(1, std::move(v));
  }
  if (a.ndim() != 2) throw Error("expected a 2-d array of points (rows) or a 1-d array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  if (d == 0) throw Error("points have zero columns");
  return SampleSet(d, std::vector<double>(a.data(), a.data() + n * d));
}

Array to_array(const SampleSet& s) {
  Array out({s.rows(), s.dim()});
  std::copy(s.values().begin(), s.values().end(), out.mutable_data());
  return out;
}

GaussianSpec make_gaussian(const std::vector<double>& mean, const Array& covariance,
                           std::optional<std::vector<double>> lower, std::optional<std::vector<double>> upper) {
  const std::size_t d = mean.size();
  if (d == 0) throw Error("mean is empty");
  GaussianSpec s;
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(d));
  if (covariance.ndim() == 0 || (covariance.ndim() == 1 && covariance.shape(0) == 1)) {
    s.covariance = covariance.data()[0] * Eigen::MatrixXd::Identity(d, d);
  } else if (covariance.ndim() == 2 && covariance.shape(0) == static_cast<py::ssize_t>(d) &&
             covariance.shape(1) == static_cast<py::ssize_t>(d)) {
    s.covariance.resize(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) s.covariance(i, j) = covariance.at(i, j);
  } else {
    throw Error("covariance must be a scalar variance or a d x d matrix");
  }
  if (lower || upper) {
    if (!lower || !upper) throw Error("give both lower and upper truncation bounds");
    auto widen = [d](std::vector<double> v) { return v.size() == 1 ? std::vector<double>(d, v[0]) : v; };
    s.truncation = Box{widen(*lower), widen(*upper)};
  }
  return s;
}

std::string weights_json(const WeightVector& w, const EnsembleSpec& spec) { return to_json(w, spec).dump(); }

}  // namespace

PYBIND11_MODULE(_divest, m) {
  m.doc() = "k-NN plug-in and weighted ensemble f-divergence estimators";
  py::register_exception<Error>(m, "DivestError", PyExc_ValueError);

  py::class_<GaussianSpec>(m, "GaussianSpec")
      .def(py::init(&make_gaussian), py::arg("mean"), py::arg("covariance"), py::arg("lower") = py::none(),
           py::arg("upper") = py::none())
      .def_property_readonly("dim", &GaussianSpec::dim)
      .def("describe", &GaussianSpec::describe)
      .def(
          "sample", [](const GaussianSpec& s, std::size_t n, std::uint64_t seed) {
            return to_array(sample(s, n, Seed{seed, 0}));
          },
          py::arg("n"), py::arg("seed"))
      .def(
          "density", [](const GaussianSpec& s, const Array& x) {
            GaussianModel model(s);
            SampleSet pts = to_samples(x);
            std::vector<double> out(pts.rows());
            for (std::size_t i = 0; i < pts.rows(); ++i) out[i] = model.density_at(pts.row(i));
            return out;
          },
          py::arg("x"));

  m.def(
      "true_divergence",
      [](const GaussianSpec& f1, const GaussianSpec& f2, const std::string& g, std::size_t budget,
         std::uint64_t seed, unsigned threads) {
        py::gil_scoped_release release;
        auto r = true_divergence(f1, f2, GFunctional::parse(g), budget, Seed{seed, 0}.with_stream(Stream::oracle),
                                 resolve_threads(threads));
        return std::make_tuple(r.value, r.std_error, r.closed_form);
      },
      py::arg("f1"), py::arg("f2"), py::arg("g") = "renyi:0.8", py::arg("budget") = 100000,
      py::arg("seed") = 1, py::arg("threads") = 1,
      "Monte Carlo value of G(f1, f2) as (value, std_error, closed_form or None).");

  m.def("unit_ball_volume", &unit_ball_volume, py::arg("d"));

  m.def(
      "kth_distance",
      [](const Array& points, const Array& queries, std::size_t k, bool brute_force) {
        SampleSet p = to_samples(points);
        SampleSet q = to_samples(queries);
        if (q.dim() != p.dim()) throw Error("queries and points differ in dimension");
        NeighborIndex idx(p, brute_force ? NeighborIndex::Method::brute_force : NeighborIndex::Method::kd_tree);
        std::vector<double> out(q.rows());
        for (std::size_t i = 0; i < q.rows(); ++i) out[i] = idx.kth_distance(q.row(i), k);
        return out;
      },
      py::arg("points"), py::arg("queries"), py::arg("k"), py::arg("brute_force") = false);

  m.def(
      "split_f2",
      [](const Array& samples, double alpha_frac, std::uint64_t seed) {
        DataSplit s = split_f2(to_samples(samples), alpha_frac, Seed{seed, 0}.with_stream(Stream::split));
        return std::make_pair(to_array(s.eval), to_array(s.reference));
      },
      py::arg("samples"), py::arg("alpha_frac") = 0.5, py::arg("seed") = 1);

  m.def(
      "plugin_estimate",
      [](const Array& eval, const Array& ref, const Array& f1, std::size_t k1, std::size_t k2,
         const std::string& g) {
        Estimate e = plugin_estimate(to_samples(eval), to_samples(ref), to_samples(f1), k1, k2, GFunctional::parse(g));
        return std::make_pair(e.functional, e.divergence);
      },
      py::arg("eval"), py::arg("ref"), py::arg("f1"), py::arg("k1"), py::arg("k2"), py::arg("g") = "renyi:0.8");

  m.def(
      "plugin_estimate_kernel",
      [](const Array& eval, const Array& ref, const Array& f1, std::size_t k1, std::size_t k2,
         std::vector<double> lower, std::vector<double> upper, const std::string& g, const std::string& rule,
         std::uint64_t seed) {
        SampleSet e = to_samples(eval);
        auto widen = [&](std::vector<double> v) { return v.size() == 1 ? std::vector<double>(e.dim(), v[0]) : v; };
        KernelPluginOptions opt;
        opt.k1 = k1;
        opt.k2 = k2;
        opt.rule = parse_bandwidth_rule(rule);
        opt.support = Box{widen(lower), widen(upper)};
        opt.ball_seed = Seed{seed, 0}.with_stream(Stream::kernel_ball);
        Estimate est = plugin_estimate_kernel(e, to_samples(ref), to_samples(f1), opt, GFunctional::parse(g));
        return std::make_pair(est.functional, est.divergence);
      },
      py::arg("eval"), py::arg("ref"), py::arg("f1"), py::arg("k1"), py::arg("k2"), py::arg("lower"),
      py::arg("upper"), py::arg("g") = "renyi:0.8", py::arg("rule") = "volume_matched", py::arg("seed") = 1);

  m.def(
      "solve_exact_weights",
      [](const std::vector<double>& l, std::size_t d) {
        EnsembleSpec spec(l, d);
        return weights_json(solve_exact_weights(spec), spec);
      },
      py::arg("l"), py::arg("d"));

  m.def(
      "solve_relaxed_weights",
      [](const std::vector<double>& l, std::size_t d, std::size_t T, double eta) {
        EnsembleSpec spec(l, d);
        return weights_json(solve_relaxed_weights(spec, T, eta), spec);
      },
      py::arg("l"), py::arg("d"), py::arg("T"), py::arg("eta"));

  m.def(
      "ensemble_estimate",
      [](const Array& eval, const Array& ref, const Array& f1, const std::vector<double>& l,
         const std::vector<double>& weights, const std::string& g) {
        SampleSet e = to_samples(eval);
        EnsembleSpec spec(l, e.dim());
        WeightVector w;
        w.weights = weights;
        fill_diagnostics(spec, w);
        EnsembleEstimate out = ensemble_estimate(e, to_samples(ref), to_samples(f1), spec, w, GFunctional::parse(g));
        return std::make_tuple(out.combined.functional, out.combined.divergence, out.k_values);
      },
      py::arg("eval"), py::arg("ref"), py::arg("f1"), py::arg("l"), py::arg("weights"), py::arg("g") = "renyi:0.8");

  m.def(
      "estimate",
      [](const Array& f1, const Array& f2, const std::string& estimator, const std::string& g, double alpha_frac,
         std::uint64_t seed, double eta) {
        EstimateRequest req;
        req.estimator = parse_estimator(estimator);
        req.g = g;
        req.alpha_frac = alpha_frac;
        req.seed = seed;
        req.eta = eta;
        return to_json(estimate_from_samples(to_samples(f1), to_samples(f2), req)).dump();
      },
      py::arg("f1"), py::arg("f2"), py::arg("estimator") = "ensemble_relaxed", py::arg("g") = "renyi:0.8",
      py::arg("alpha_frac") = 0.5, py::arg("seed") = 1, py::arg("eta") = 2.0);

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::optional<std::string>& out_dir) {
        ExperimentConfig cfg = experiment_config_from_json(Json::parse(config_json));
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_experiment(cfg);
          if (out_dir) write_experiment_outputs(*out_dir, cfg, result);
        }
        std::ostringstream records, summary;
        write_records_csv(records, result.records);
        write_summary_csv(summary, summarize(result.records));
        return std::make_pair(records.str(), summary.str());
      },
      py::arg("config_json"), py::arg("out_dir") = py::none(),
      "Runs a study; returns (records CSV text, summary CSV text).");

  m.def(
      "reference_curve",
      [](const std::vector<std::size_t>& T, double c) { return reference_curve(T, c); }, py::arg("T_grid"),
      py::arg("c") = 100.0);
}
