// divest: command-line front end.
//
//   divest estimate   --f1 a.csv --f2 b.csv [--estimator ...] [--g renyi:0.8]
//   divest weights    --d 5 [--mode exact|relaxed] [--T 3000] [--eta 2]
//   divest experiment --config study.json --out results/
//   divest oracle     --d 5 [--f1 <json>] [--f2 <json>] [--budget 1e7]
//
// The resolved configuration goes to stderr, data to stdout (or --out).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divest/config.hpp"
#include "divest/csv.hpp"
#include "divest/error.hpp"
#include "divest/harness.hpp"

using divest::Json;

namespace {

struct Shared {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  std::string threads = "auto";
};

unsigned parse_threads(const std::string& s) {
  if (s == "auto") return 0;
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos == s.size() && v >= 1) return static_cast<unsigned>(v);
  } catch (const std::exception&) {
  }
  throw divest::Error("--threads expects a positive integer or 'auto', got '" + s + "'");
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw divest::Error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw divest::Error(path + ": " + e.what());
  }
}

// Fills options of a subcommand from a flat JSON object whose keys are long
// flag names. Flags given on the command line win.
void apply_flag_file(CLI::App& sub, const std::string& path) {
  Json j = read_json_file(path);
  if (!j.is_object()) throw divest::Error(path + ": expected a JSON object of flag values");
  for (auto it = j.begin(); it != j.end(); ++it) {
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option("--" + it.key());
    } catch (const CLI::OptionNotFound&) {
      throw divest::Error(path + ": unknown key '" + it.key() + "' for '" + sub.get_name() + "'");
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> vals;
    auto to_text = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    if (it.value().is_array())
      for (const auto& v : it.value()) vals.push_back(to_text(v));
    else
      vals.push_back(to_text(it.value()));
    opt->add_result(vals);
    opt->run_callback();
  }
}

void emit(const Shared& sh, const Json& j) {
  if (sh.out.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(sh.out);
  if (!f) throw divest::Error("cannot write '" + sh.out + "'");
  f << j.dump(2) << '\n';
}

void print_resolved(const std::string& command, Json j) {
  Json all;
  all["command"] = command;
  all["config"] = std::move(j);
  std::cerr << "resolved config: " << all.dump() << '\n';
}

std::optional<divest::GaussianTemplate> gaussian_arg(const std::string& text) {
  if (text.empty()) return std::nullopt;
  Json j;
  if (!text.empty() && text.front() == '{') {
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw divest::Error(std::string("Gaussian spec: ") + e.what());
    }
  } else {
    j = read_json_file(text);
  }
  return divest::gaussian_template_from_json(j);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-NN plug-in and ensemble f-divergence estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  Shared sh;
  app.add_option("--config", sh.config, "Config file (experiment: study JSON; others: JSON object of flag values)");
  auto* seed_opt = app.add_option("--seed", sh.seed, "Master seed");
  app.add_option("--out", sh.out, "Output file (directory for experiment)");
  auto* threads_opt = app.add_option("--threads", sh.threads, "Worker threads, or auto");

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate G(f1, f2) from two CSV sample files");
  std::string f1_path, f2_path, estimator = "ensemble_relaxed", bandwidth = "volume_matched";
  divest::EstimateRequest req;
  std::size_t k = 0;
  std::vector<double> l_values;
  std::vector<double> support_lower, support_upper;
  est->add_option("--f1", f1_path, "f1 samples, one point per row")->required();
  est->add_option("--f2", f2_path, "f2 samples, one point per row")->required();
  est->add_option("--estimator", estimator, "knn_plugin, kernel_plugin, ensemble_exact or ensemble_relaxed");
  est->add_option("--g", req.g, "renyi:<alpha>, kl or custom:one");
  est->add_option("--alpha-frac", req.alpha_frac, "Fraction of f2 used as density reference");
  est->add_option("--k", k, "Plug-in k for both densities (default round(sqrt(M)))");
  est->add_option("--eta", req.eta, "Norm bound of the relaxed weights");
  est->add_option("--l-min", req.l_set.l_min);
  est->add_option("--l-max", req.l_set.l_max);
  est->add_option("--l-count", req.l_set.count);
  est->add_option("--l", l_values, "Explicit l values (overrides the evenly spaced set)");
  est->add_option("--bandwidth", bandwidth, "Kernel bandwidth rule: volume_matched or radius");
  est->add_option("--ball-draws", req.kernel_ball_draws);
  est->add_option("--support-lower", support_lower, "Kernel support box, scalar or per dimension");
  est->add_option("--support-upper", support_upper);

  // weights
  auto* wts = app.add_subcommand("weights", "Solve for ensemble weights");
  std::size_t wd = 0, wT = 0;
  std::string mode = "exact";
  double weta = 2.0;
  divest::IndexSetConfig wl;
  std::vector<double> wl_values;
  wts->add_option("--d", wd, "Dimension")->required();
  wts->add_option("--mode", mode, "exact or relaxed")->check(CLI::IsMember({"exact", "relaxed"}));
  wts->add_option("--T", wT, "Sample size (relaxed)");
  wts->add_option("--eta", weta, "Norm bound (relaxed)");
  wts->add_option("--l-min", wl.l_min);
  wts->add_option("--l-max", wl.l_max);
  wts->add_option("--l-count", wl.count);
  wts->add_option("--l", wl_values, "Explicit l values");

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a Monte Carlo study from a JSON config");

  // oracle
  auto* orc = app.add_subcommand("oracle", "Monte Carlo ground truth for two Gaussians");
  std::size_t od = 5, budget = 10'000'000;
  std::string of1, of2, og = "renyi:0.8";
  orc->add_option("--d", od, "Dimension");
  orc->add_option("--f1", of1, "Gaussian spec as JSON text or a JSON file (default: the truncated study's f1)");
  orc->add_option("--f2", of2, "Gaussian spec as JSON text or a JSON file");
  orc->add_option("--g", og, "renyi:<alpha>, kl or custom:one");
  orc->add_option("--budget", budget, "Monte Carlo draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    const unsigned threads = parse_threads(sh.threads);
    if (est->parsed()) {
      if (!sh.config.empty()) apply_flag_file(*est, sh.config);
      req.estimator = divest::parse_estimator(estimator);
      req.kernel_bandwidth = divest::parse_bandwidth_rule(bandwidth);
      req.seed = sh.seed;
      if (k > 0) req.k = k;
      if (!l_values.empty()) req.l_set.values = l_values;
      divest::SampleSet f1 = divest::read_points_csv(f1_path);
      divest::SampleSet f2 = divest::read_points_csv(f2_path);
      if (!support_lower.empty() || !support_upper.empty()) {
        if (support_lower.empty() || support_upper.empty())
          throw divest::Error("give both --support-lower and --support-upper");
        auto widen = [&](std::vector<double> v) {
          return v.size() == 1 ? std::vector<double>(f1.dim(), v[0]) : v;
        };
        req.support = divest::Box{widen(support_lower), widen(support_upper)};
      }
      Json cfg = divest::to_json(req);
      cfg["f1"] = f1_path;
      cfg["f2"] = f2_path;
      print_resolved("estimate", cfg);
      emit(sh, divest::to_json(divest::estimate_from_samples(f1, f2, req)));
    } else if (wts->parsed()) {
      if (!sh.config.empty()) apply_flag_file(*wts, sh.config);
      if (!wl_values.empty()) wl.values = wl_values;
      Json cfg{{"d", wd}, {"mode", mode}};
      if (wl.values.empty())
        cfg["l_set"] = Json{{"l_min", wl.l_min}, {"l_max", wl.l_max}, {"count", wl.count}};
      else
        cfg["l_set"] = Json{{"values", wl.values}};
      if (mode == "relaxed") {
        if (wT == 0) throw divest::Error("relaxed weights need --T");
        cfg["T"] = wT;
        cfg["eta"] = weta;
      }
      print_resolved("weights", cfg);
      divest::EnsembleSpec spec = wl.resolve(wd);
      divest::WeightVector w =
          mode == "exact" ? divest::solve_exact_weights(spec) : divest::solve_relaxed_weights(spec, wT, weta);
      emit(sh, divest::to_json(w, spec));
    } else if (exp->parsed()) {
      if (sh.config.empty()) throw divest::Error("experiment needs --config <study.json>");
      divest::ExperimentConfig cfg = divest::load_experiment_config(sh.config);
      if (seed_opt->count() > 0) cfg.seed = sh.seed;
      if (threads_opt->count() > 0) cfg.threads = threads;
      const std::string out = sh.out.empty() ? "results" : sh.out;
      Json resolved = divest::to_json(cfg);
      resolved["out"] = out;
      print_resolved("experiment", resolved);
      auto result = divest::run_experiment(cfg, [](std::size_t done, std::size_t total) {
        if (done == total || done % 50 == 0) std::cerr << "progress " << done << "/" << total << '\n';
      });
      divest::write_experiment_outputs(out, cfg, result);
      std::size_t failed = 0;
      for (const auto& r : result.records) failed += r.failed ? 1 : 0;
      std::cerr << "wrote " << result.records.size() << " records (" << failed << " failed) to " << out << '\n';
    } else if (orc->parsed()) {
      if (!sh.config.empty()) apply_flag_file(*orc, sh.config);
      auto study = divest::ExperimentConfig::truncated_gaussian_study();
      divest::GaussianTemplate t1 = gaussian_arg(of1).value_or(study.f1);
      divest::GaussianTemplate t2 = gaussian_arg(of2).value_or(study.f2);
      divest::GaussianSpec s1 = t1.resolve(od), s2 = t2.resolve(od);
      divest::GFunctional g = divest::GFunctional::parse(og);
      Json cfg{{"d", od}, {"f1", divest::to_json(s1)}, {"f2", divest::to_json(s2)}, {"g", g.spec_string()},
               {"budget", budget}, {"seed", sh.seed}, {"threads", divest::resolve_threads(threads)}};
      print_resolved("oracle", cfg);
      auto r = divest::true_divergence(s1, s2, g, budget, divest::oracle_seed(sh.seed, od),
                                       divest::resolve_threads(threads));
      Json j{{"truth", r.value}, {"std_error", r.std_error}, {"budget", r.budget}};
      try {
        j["divergence"] = g.to_divergence(r.value);
      } catch (const std::exception&) {
        j["divergence"] = nullptr;
      }
      if (r.closed_form) j["closed_form"] = *r.closed_form;
      emit(sh, j);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
