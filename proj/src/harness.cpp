#include "divest/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <thread>
#include <tuple>

#include "divest/csv.hpp"
#include "divest/error.hpp"

namespace divest {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

class NeumaierSum {
 public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

std::vector<std::size_t> sorted_unique(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool is_ensemble(EstimatorKind e) {
  return e == EstimatorKind::ensemble_exact || e == EstimatorKind::ensemble_relaxed;
}

Box support_of(const GaussianSpec& s) {
  if (s.truncation) return *s.truncation;
  const double inf = std::numeric_limits<double>::infinity();
  return Box{std::vector<double>(s.dim(), -inf), std::vector<double>(s.dim(), inf)};
}

// Everything a trial needs that depends on d only (or on (d, T) for weights).
struct DimensionContext {
  std::size_t d = 0;
  std::unique_ptr<GaussianModel> f1, f2;
  std::string model_error;
  std::optional<double> truth;
  std::string truth_error;
  std::optional<EnsembleSpec> spec;
  std::string spec_error;
  Seed ball_seed;
};

struct WeightKey {
  std::size_t d, T;
  EstimatorKind e;
  bool operator<(const WeightKey& o) const {
    return std::tie(d, T, e) < std::tie(o.d, o.T, o.e);
  }
};

std::vector<TrialRecord> run_unit(const ExperimentConfig& cfg, const GFunctional& g,
                                  const DimensionContext& dc, std::size_t T, std::size_t trial,
                                  const std::map<WeightKey, const WeightEntry*>& weights) {
  std::vector<TrialRecord> out;
  for (EstimatorKind e : cfg.estimators) {
    TrialRecord r;
    r.T = T;
    r.d = dc.d;
    r.trial = trial;
    r.estimator = e;
    r.truth = dc.truth;
    out.push_back(std::move(r));
  }
  auto fail_all = [&](const std::string& reason) {
    for (auto& r : out)
      if (!r.failed) {
        r.failed = true;
        r.reason = reason;
      }
  };
  if (!dc.model_error.empty()) {
    fail_all(dc.model_error);
    return out;
  }

  const auto seeds = trial_seeds(cfg.seed, T, dc.d, trial);
  const std::size_t m1 = cfg.f1_count(T);
  std::optional<SampleSet> f1;
  std::optional<DataSplit> split;
  double sampling_ms = 0.0;
  try {
    auto t0 = Clock::now();
    f1 = dc.f1->sample(m1, seeds.f1);
    split = split_f2(dc.f2->sample(T, seeds.f2), cfg.alpha_frac, seeds.split);
    sampling_ms = elapsed_ms(t0);
  } catch (const std::exception& ex) {
    fail_all(std::string("sampling: ") + ex.what());
    return out;
  }
  const std::size_t m2 = split->reference.rows();

  // Neighbour tables shared by the k-NN plug-in and both ensembles.
  std::size_t k1_plugin = default_plugin_k(m1);
  std::size_t k2_plugin = default_plugin_k(m2);
  std::optional<std::vector<std::size_t>> ens_k;
  std::string ens_k_error;
  if (dc.spec) {
    try {
      ens_k = dc.spec->k_values(m1, m2);
    } catch (const std::exception& ex) {
      ens_k_error = ex.what();
    }
  }
  bool need_tables = false;
  std::size_t kmax1 = 0, kmax2 = 0;
  for (EstimatorKind e : cfg.estimators) {
    if (e == EstimatorKind::knn_plugin) {
      need_tables = true;
      kmax1 = std::max(kmax1, k1_plugin);
      kmax2 = std::max(kmax2, k2_plugin);
    } else if (is_ensemble(e) && ens_k) {
      need_tables = true;
      std::size_t k = *std::max_element(ens_k->begin(), ens_k->end());
      kmax1 = std::max(kmax1, k);
      kmax2 = std::max(kmax2, k);
    }
  }
  std::optional<NeighborDistanceTable> t1, t2;
  std::string table_error;
  double table_ms = 0.0;
  if (need_tables) {
    try {
      auto t0 = Clock::now();
      NeighborIndex i1(*f1);
      NeighborIndex i2(split->reference);
      t1.emplace(i1, split->eval, kmax1);
      t2.emplace(i2, split->eval, kmax2);
      table_ms = elapsed_ms(t0);
    } catch (const std::exception& ex) {
      table_error = std::string("neighbour search: ") + ex.what();
    }
  }

  for (auto& r : out) {
    auto t0 = Clock::now();
    double shared_ms = sampling_ms;
    try {
      switch (r.estimator) {
        case EstimatorKind::knn_plugin:
          if (!table_error.empty()) throw Error(table_error);
          r.estimate = plugin_from_tables(*t1, *t2, k1_plugin, k2_plugin, g);
          shared_ms += table_ms;
          break;
        case EstimatorKind::kernel_plugin: {
          KernelPluginOptions opt;
          opt.k1 = k1_plugin;
          opt.k2 = k2_plugin;
          opt.rule = cfg.kernel_bandwidth;
          opt.support = support_of(dc.f2->spec());
          opt.ball_seed = dc.ball_seed;
          opt.ball_draws = cfg.kernel_ball_draws;
          r.estimate = plugin_estimate_kernel(split->eval, split->reference, *f1, opt, g);
          break;
        }
        case EstimatorKind::ensemble_exact:
        case EstimatorKind::ensemble_relaxed: {
          if (!dc.spec) throw Error("ensemble: " + dc.spec_error);
          if (!ens_k) throw Error(ens_k_error);
          if (!table_error.empty()) throw Error(table_error);
          std::size_t wT = r.estimator == EstimatorKind::ensemble_exact ? 0 : T;
          const WeightEntry* w = weights.at(WeightKey{dc.d, wT, r.estimator});
          if (!w->weights) throw Error("weights: " + w->error);
          r.estimate = ensemble_from_tables(*t1, *t2, *dc.spec, *w->weights, g).combined;
          shared_ms += table_ms;
          break;
        }
      }
      if (!dc.truth) {
        r.failed = true;
        r.reason = "oracle: " + dc.truth_error;
      }
    } catch (const std::exception& ex) {
      r.estimate.reset();
      r.failed = true;
      r.reason = ex.what();
    }
    if (cfg.record_timing) r.wall_ms = elapsed_ms(t0) + shared_ms;
  }
  return out;
}

std::string record_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::optional<double> TrialRecord::sq_error() const {
  if (!estimate || !truth) return std::nullopt;
  double e = estimate->functional - *truth;
  return e * e;
}

TrialSeeds trial_seeds(std::uint64_t master, std::size_t T, std::size_t d, std::size_t trial) {
  Seed base = Seed{master, 0}.derive({0x7472ULL, T, d, trial});
  return {base.with_stream(Stream::f1), base.with_stream(Stream::f2), base.with_stream(Stream::split)};
}

Seed oracle_seed(std::uint64_t master, std::size_t d) {
  return Seed{master, 0}.derive({0x6f72ULL, d}).with_stream(Stream::oracle);
}

Seed kernel_ball_seed(std::uint64_t master, std::size_t d) {
  return Seed{master, 0}.derive({0x6b62ULL, d}).with_stream(Stream::kernel_ball);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(std::size_t, std::size_t)>& on_progress) {
  config.validate();
  const GFunctional g = config.functional();
  const unsigned threads = resolve_threads(config.threads);
  const auto T_grid = sorted_unique(config.T_grid);
  const auto d_grid = sorted_unique(config.d_grid);
  const bool any_ensemble = std::any_of(config.estimators.begin(), config.estimators.end(), is_ensemble);

  ExperimentResult result;
  std::vector<DimensionContext> dims(d_grid.size());
  for (std::size_t di = 0; di < d_grid.size(); ++di) {
    DimensionContext& dc = dims[di];
    dc.d = d_grid[di];
    dc.ball_seed = kernel_ball_seed(config.seed, dc.d);
    TruthEntry te;
    te.d = dc.d;
    try {
      GaussianSpec s1 = config.f1.resolve(dc.d);
      GaussianSpec s2 = config.f2.resolve(dc.d);
      dc.f1 = std::make_unique<GaussianModel>(s1);
      dc.f2 = std::make_unique<GaussianModel>(s2);
      try {
        te.result = true_divergence(s1, s2, g, config.oracle_budget, oracle_seed(config.seed, dc.d), threads);
        dc.truth = te.result->value;
      } catch (const std::exception& ex) {
        te.error = ex.what();
        dc.truth_error = ex.what();
      }
    } catch (const std::exception& ex) {
      dc.model_error = std::string("distribution: ") + ex.what();
      te.error = dc.model_error;
      dc.truth_error = dc.model_error;
    }
    result.truths.push_back(std::move(te));
    if (any_ensemble) {
      try {
        dc.spec = config.l_set.resolve(dc.d);
      } catch (const std::exception& ex) {
        dc.spec_error = ex.what();
      }
    }
  }

  // Weights: once per d for the exact solver, once per (d, T) for the relaxed one.
  for (const auto& dc : dims) {
    for (EstimatorKind e : config.estimators) {
      if (!is_ensemble(e)) continue;
      std::vector<std::size_t> Ts = e == EstimatorKind::ensemble_exact ? std::vector<std::size_t>{0} : T_grid;
      for (std::size_t T : Ts) {
        WeightEntry we;
        we.d = dc.d;
        we.T = T;
        we.estimator = e;
        we.spec = dc.spec;
        if (!dc.spec) {
          we.error = dc.spec_error;
        } else {
          try {
            we.weights = e == EstimatorKind::ensemble_exact ? solve_exact_weights(*dc.spec)
                                                            : solve_relaxed_weights(*dc.spec, T, config.eta);
          } catch (const std::exception& ex) {
            we.error = ex.what();
          }
        }
        result.weights.push_back(std::move(we));
      }
    }
  }
  std::map<WeightKey, const WeightEntry*> weight_index;
  for (const auto& we : result.weights) weight_index[WeightKey{we.d, we.T, we.estimator}] = &we;

  struct Unit {
    std::size_t T, di, trial;
  };
  std::vector<Unit> units;
  for (std::size_t T : T_grid)
    for (std::size_t di = 0; di < dims.size(); ++di)
      for (std::size_t t = 0; t < config.trials; ++t) units.push_back({T, di, t});

  std::vector<std::vector<TrialRecord>> slots(units.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex progress_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      const Unit& u = units[i];
      slots[i] = run_unit(config, g, dims[u.di], u.T, u.trial, weight_index);
      if (on_progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        on_progress(++done, units.size());
      }
    }
  };
  const unsigned n_workers = std::min<std::size_t>(threads, std::max<std::size_t>(units.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& s : slots)
    for (auto& r : s) result.records.push_back(std::move(r));
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, Scale scale,
                                  const GFunctional* g) {
  if (scale == Scale::divergence && !g) throw Error("summarize: the divergence scale needs g");
  struct Cell {
    SummaryRow row;
    std::vector<double> values;
    std::optional<double> truth;
  };
  std::vector<Cell> cells;
  std::map<std::tuple<std::size_t, std::size_t, int>, std::size_t> where;
  for (const auto& r : records) {
    auto key = std::make_tuple(r.T, r.d, static_cast<int>(r.estimator));
    auto it = where.find(key);
    if (it == where.end()) {
      it = where.emplace(key, cells.size()).first;
      Cell c;
      c.row.T = r.T;
      c.row.d = r.d;
      c.row.estimator = r.estimator;
      cells.push_back(std::move(c));
    }
    Cell& c = cells[it->second];
    if (r.failed || !r.estimate || !r.truth) {
      ++c.row.n_failed;
      continue;
    }
    double truth = *r.truth;
    double value = r.estimate->functional;
    if (scale == Scale::divergence) {
      truth = g->to_divergence(truth);
      value = r.estimate->divergence;
    }
    if (c.truth && *c.truth != truth) throw Error("summarize: records of one cell disagree on the truth");
    c.truth = truth;
    c.values.push_back(value);
  }

  std::vector<SummaryRow> rows;
  for (auto& c : cells) {
    SummaryRow row = c.row;
    row.n = c.values.size();
    if (row.n == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.all_failed = true;
      row.mse = row.bias = row.variance = row.mean = row.std = nan;
      rows.push_back(row);
      continue;
    }
    NeumaierSum sum, sq;
    for (double v : c.values) {
      sum.add(v);
      double e = v - *c.truth;
      sq.add(e * e);
    }
    const double n = static_cast<double>(row.n);
    row.mean = sum.value() / n;
    row.mse = sq.value() / n;
    row.bias = row.mean - *c.truth;
    NeumaierSum var;
    for (double v : c.values) var.add((v - row.mean) * (v - row.mean));
    row.variance = var.value() / n;
    row.std = std::sqrt(row.variance);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::pair<std::size_t, double>> reference_curve(const std::vector<std::size_t>& T_grid, double c) {
  if (!(c > 0.0)) throw Error("reference_curve: c must be positive");
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t T : T_grid) {
    if (T == 0) throw Error("reference_curve: T must be positive");
    out.emplace_back(T, c / static_cast<double>(T));
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("loglog_slope: need at least two (x, y) pairs");
  double mx = 0, my = 0;
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error("loglog_slope: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0.0) throw Error("loglog_slope: x values are all equal");
  return sxy / sxx;
}

std::vector<CellValidity> cell_validity(const std::vector<SummaryRow>& summary,
                                        const std::vector<TruthEntry>& truths) {
  std::map<std::pair<std::size_t, std::size_t>, double> min_rmse;
  for (const auto& r : summary) {
    if (r.all_failed) continue;
    auto key = std::make_pair(r.T, r.d);
    double rmse = std::sqrt(r.mse);
    auto it = min_rmse.find(key);
    if (it == min_rmse.end() || rmse < it->second) min_rmse[key] = rmse;
  }
  std::vector<CellValidity> out;
  for (const auto& [key, rmse] : min_rmse) {
    CellValidity c;
    c.T = key.first;
    c.d = key.second;
    c.min_rmse = rmse;
    for (const auto& t : truths)
      if (t.d == c.d && t.result) {
        c.oracle_std_error = t.result->std_error;
        c.valid = c.oracle_std_error <= 0.05 * rmse;
      }
    out.push_back(c);
  }
  return out;
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << "T,d,trial,estimator,estimate_functional,estimate_divergence,truth,sq_error,failed,reason,wall_ms\n";
  for (const auto& r : records) {
    std::optional<double> ef, ed;
    if (r.estimate) {
      ef = r.estimate->functional;
      ed = r.estimate->divergence;
    }
    write_csv_row(out, {std::to_string(r.T), std::to_string(r.d), std::to_string(r.trial), to_string(r.estimator),
                        record_field(ef), record_field(ed), record_field(r.truth),
                        r.failed ? std::string() : record_field(r.sq_error()), r.failed ? "1" : "0", r.reason,
                        format_double(r.wall_ms)});
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "T,d,estimator,n,mse,bias,variance,mean,std\n";
  for (const auto& r : rows)
    write_csv_row(out, {std::to_string(r.T), std::to_string(r.d), to_string(r.estimator), std::to_string(r.n),
                        format_double(r.mse), format_double(r.bias), format_double(r.variance),
                        format_double(r.mean), format_double(r.std)});
}

namespace {

void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  body(out);
  if (!out) throw Error("error writing '" + p.string() + "'");
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

void write_experiment_outputs(const std::string& dir, const ExperimentConfig& config,
                              const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  const GFunctional g = config.functional();
  const auto summary = summarize(result.records, Scale::functional);
  const auto summary_div = summarize(result.records, Scale::divergence, &g);

  write_file(root / "records.csv", [&](std::ostream& o) { write_records_csv(o, result.records); });
  write_file(root / "summary.csv", [&](std::ostream& o) { write_summary_csv(o, summary); });
  write_file(root / "summary_divergence.csv", [&](std::ostream& o) { write_summary_csv(o, summary_div); });
  write_file(root / "reference.csv", [&](std::ostream& o) {
    o << "T,reference\n";
    for (const auto& [T, v] : reference_curve(sorted_unique(config.T_grid), config.reference_c))
      o << T << ',' << format_double(v) << '\n';
  });
  write_file(root / "config.json", [&](std::ostream& o) { o << to_json(config).dump(2) << '\n'; });

  Json weights = Json::array();
  for (const auto& we : result.weights) {
    Json j;
    j["estimator"] = to_string(we.estimator);
    j["d"] = we.d;
    if (we.T) j["T"] = we.T;
    if (we.spec) j["l"] = we.spec->indices();
    if (we.weights && we.spec) {
      j["solution"] = to_json(*we.weights, *we.spec);
    } else {
      j["error"] = we.error;
    }
    weights.push_back(j);
  }
  write_file(root / "weights.json", [&](std::ostream& o) { o << weights.dump(2) << '\n'; });

  Json diag;
  Json truths = Json::array();
  for (const auto& t : result.truths) {
    Json j;
    j["d"] = t.d;
    if (t.result) {
      j["functional"] = t.result->value;
      j["std_error"] = t.result->std_error;
      j["budget"] = t.result->budget;
      try {
        j["divergence"] = g.to_divergence(t.result->value);
      } catch (const std::exception&) {
        j["divergence"] = nullptr;
      }
      if (t.result->closed_form) j["closed_form"] = *t.result->closed_form;
    } else {
      j["error"] = t.error;
    }
    truths.push_back(j);
  }
  diag["truth"] = truths;
  Json cells = Json::array();
  for (const auto& c : cell_validity(summary, result.truths))
    cells.push_back(Json{{"T", c.T}, {"d", c.d}, {"oracle_std_error", c.oracle_std_error},
                         {"min_rmse", number_or_null(c.min_rmse)}, {"valid", c.valid}});
  diag["cells"] = cells;
  Json rows = Json::array();
  for (const auto& r : summary)
    rows.push_back(Json{{"T", r.T}, {"d", r.d}, {"estimator", to_string(r.estimator)}, {"n", r.n},
                        {"n_failed", r.n_failed}, {"all_failed", r.all_failed}});
  diag["summary"] = rows;
  write_file(root / "diagnostics.json", [&](std::ostream& o) { o << diag.dump(2) << '\n'; });
}

EstimateOutcome estimate_from_samples(const SampleSet& f1, const SampleSet& f2, const EstimateRequest& req) {
  if (f1.empty() || f2.empty()) throw Error("estimate: empty sample file");
  if (f1.dim() != f2.dim())
    throw Error("estimate: f1 samples have d = " + std::to_string(f1.dim()) + " but f2 samples have d = " +
                std::to_string(f2.dim()));
  const GFunctional g = GFunctional::parse(req.g);
  const std::size_t d = f1.dim();
  DataSplit split = split_f2(f2, req.alpha_frac, Seed{req.seed, 0}.with_stream(Stream::split));
  EstimateOutcome out;
  out.estimator = req.estimator;
  out.n_points = split.eval.rows();
  out.m1 = f1.rows();
  out.m2 = split.reference.rows();
  std::size_t k1 = req.k ? *req.k : default_plugin_k(out.m1);
  std::size_t k2 = req.k ? *req.k : default_plugin_k(out.m2);
  switch (req.estimator) {
    case EstimatorKind::knn_plugin:
      out.estimate = plugin_estimate(split.eval, split.reference, f1, k1, k2, g);
      out.k_values = {k1, k2};
      break;
    case EstimatorKind::kernel_plugin: {
      KernelPluginOptions opt;
      opt.k1 = k1;
      opt.k2 = k2;
      opt.rule = req.kernel_bandwidth;
      opt.ball_seed = Seed{req.seed, 0}.with_stream(Stream::kernel_ball);
      opt.ball_draws = req.kernel_ball_draws;
      if (req.support) {
        opt.support = *req.support;
      } else {
        opt.support = Box{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                          std::vector<double>(d, -std::numeric_limits<double>::infinity())};
        for (const SampleSet* s : {&f1, &f2})
          for (std::size_t i = 0; i < s->rows(); ++i)
            for (std::size_t j = 0; j < d; ++j) {
              opt.support.lower[j] = std::min(opt.support.lower[j], s->row(i)[j]);
              opt.support.upper[j] = std::max(opt.support.upper[j], s->row(i)[j]);
            }
      }
      out.estimate = plugin_estimate_kernel(split.eval, split.reference, f1, opt, g);
      out.k_values = {k1, k2};
      break;
    }
    case EstimatorKind::ensemble_exact:
    case EstimatorKind::ensemble_relaxed: {
      EnsembleSpec spec = req.l_set.resolve(d);
      WeightVector w = req.estimator == EstimatorKind::ensemble_exact
                           ? solve_exact_weights(spec)
                           : solve_relaxed_weights(spec, f2.rows(), req.eta);
      EnsembleEstimate e = ensemble_estimate(split.eval, split.reference, f1, spec, w, g);
      out.estimate = e.combined;
      out.k_values = e.k_values;
      out.weights = w.weights;
      break;
    }
  }
  return out;
}

Json to_json(const EstimateRequest& r) {
  Json j;
  j["estimator"] = to_string(r.estimator);
  j["g"] = r.g;
  j["alpha_frac"] = r.alpha_frac;
  j["seed"] = r.seed;
  if (is_ensemble(r.estimator)) {
    if (r.l_set.values.empty())
      j["l_set"] = Json{{"l_min", r.l_set.l_min}, {"l_max", r.l_set.l_max}, {"count", r.l_set.count}};
    else
      j["l_set"] = Json{{"values", r.l_set.values}};
    if (r.estimator == EstimatorKind::ensemble_relaxed) j["eta"] = r.eta;
  } else {
    j["k"] = r.k ? Json(*r.k) : Json("round(sqrt(M))");
  }
  if (r.estimator == EstimatorKind::kernel_plugin) {
    j["kernel_bandwidth"] = to_string(r.kernel_bandwidth);
    j["kernel_ball_draws"] = r.kernel_ball_draws;
    if (r.support)
      j["support"] = Json{{"lower", r.support->lower}, {"upper", r.support->upper}};
    else
      j["support"] = "bounding box of the samples";
  }
  return j;
}

Json to_json(const EstimateOutcome& o) {
  Json j;
  j["functional"] = o.estimate.functional;
  j["divergence"] = o.estimate.divergence;
  j["estimator"] = to_string(o.estimator);
  if (o.weights.empty())
    j["k_or_weights"] = Json{{"k1", o.k_values.at(0)}, {"k2", o.k_values.at(1)}};
  else
    j["k_or_weights"] = Json{{"k", o.k_values}, {"weights", o.weights}};
  j["n_points"] = o.n_points;
  j["M1"] = o.m1;
  j["M2"] = o.m2;
  return j;
}

}  // namespace divest
