#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "divest/config.hpp"
#include "divest/divergence.hpp"
#include "divest/ensemble.hpp"

namespace divest {

struct TrialRecord {
  std::size_t T = 0;
  std::size_t d = 0;
  std::size_t trial = 0;
  EstimatorKind estimator = EstimatorKind::knn_plugin;
  std::optional<Estimate> estimate;  // empty when failed
  std::optional<double> truth;       // functional scale; empty if the oracle failed
  bool failed = false;
  std::string reason;
  double wall_ms = 0.0;

  /// (estimate_functional - truth)^2 when both exist.
  std::optional<double> sq_error() const;
};

struct TruthEntry {
  std::size_t d = 0;
  std::optional<OracleResult> result;
  std::string error;
};

struct WeightEntry {
  std::size_t d = 0;
  std::size_t T = 0;  // 0 for the exact solver, whose weights do not depend on T
  EstimatorKind estimator = EstimatorKind::ensemble_exact;
  std::optional<EnsembleSpec> spec;
  std::optional<WeightVector> weights;
  std::string error;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // ordered by (T, d, trial, estimator)
  std::vector<TruthEntry> truths;    // one per d
  std::vector<WeightEntry> weights;
};

/// Seeds of one trial; all derived from the master seed and (T, d, trial).
struct TrialSeeds {
  Seed f1, f2, split;
};
TrialSeeds trial_seeds(std::uint64_t master, std::size_t T, std::size_t d, std::size_t trial);
Seed oracle_seed(std::uint64_t master, std::size_t d);
Seed kernel_ball_seed(std::uint64_t master, std::size_t d);

/// Runs every (T, d, trial) unit on a worker pool. Output does not depend on
/// the thread count. on_progress, if given, is called after each finished unit
/// (from worker threads, serialised).
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::function<void(std::size_t done, std::size_t total)>& on_progress = {});

enum class Scale { functional, divergence };

struct SummaryRow {
  std::size_t T = 0;
  std::size_t d = 0;
  EstimatorKind estimator = EstimatorKind::knn_plugin;
  std::size_t n = 0;         // successful trials
  std::size_t n_failed = 0;
  double mse = 0.0;          // mean squared error
  double bias = 0.0;         // mean - truth
  double variance = 0.0;     // population variance of the estimates
  double mean = 0.0;
  double std = 0.0;
  bool all_failed = false;   // flagged: no successful record (statistics are NaN)
};

/// Per (T, d, estimator) statistics over successful records with a truth,
/// in the order the cells first appear.
/// The divergence scale needs g to map the truth.
std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records,
                                  Scale scale = Scale::functional, const GFunctional* g = nullptr);

/// Rows (T, c / T).
std::vector<std::pair<std::size_t, double>> reference_curve(const std::vector<std::size_t>& T_grid, double c);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Cell validity: the oracle standard error must not exceed 5% of the
/// smallest estimator RMSE in the (T, d) cell.
struct CellValidity {
  std::size_t T = 0;
  std::size_t d = 0;
  double oracle_std_error = 0.0;
  double min_rmse = 0.0;
  bool valid = false;
};
std::vector<CellValidity> cell_validity(const std::vector<SummaryRow>& summary,
                                        const std::vector<TruthEntry>& truths);

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Writes records.csv, summary.csv, summary_divergence.csv, reference.csv,
/// weights.json, diagnostics.json and config.json into dir (created if missing).
void write_experiment_outputs(const std::string& dir, const ExperimentConfig& config,
                              const ExperimentResult& result);

/// Standalone estimate from two sample sets.
struct EstimateRequest {
  EstimatorKind estimator = EstimatorKind::ensemble_relaxed;
  std::string g = "renyi:0.8";
  double alpha_frac = 0.5;
  std::uint64_t seed = 1;
  IndexSetConfig l_set;
  double eta = 2.0;
  std::optional<std::size_t> k;  // plug-in k for both densities; default round(sqrt(M))
  BandwidthRule kernel_bandwidth = BandwidthRule::volume_matched;
  std::size_t kernel_ball_draws = TruncatedUniformKernelEstimator::kDefaultBallDraws;
  std::optional<Box> support;    // kernel only; default: bounding box of both samples
};

struct EstimateOutcome {
  Estimate estimate;
  EstimatorKind estimator = EstimatorKind::knn_plugin;
  std::vector<std::size_t> k_values;  // (k1, k2) for plug-ins, k(l) for the ensemble
  std::vector<double> weights;        // ensemble only
  std::size_t n_points = 0;           // evaluation points N
  std::size_t m1 = 0, m2 = 0;
};

EstimateOutcome estimate_from_samples(const SampleSet& f1, const SampleSet& f2, const EstimateRequest& req);

Json to_json(const EstimateRequest& r);
Json to_json(const EstimateOutcome& o);

unsigned resolve_threads(unsigned requested);

}  // namespace divest
