#pragma once

// Monte-Carlo comparison of estimators on generated scenarios.

#include "hankelid/baselines.hpp"
#include "hankelid/identify.hpp"
#include "hankelid/scenario.hpp"

#include <string>
#include <vector>

namespace hankelid {

enum class EstimatorTag { sh, ss, nn, nnw };

std::string to_string(EstimatorTag tag);
/// Comma-separated list such as "SH,SS,NN"; unknown tags throw InvalidArgument.
std::vector<EstimatorTag> parse_estimators(const std::string& list);
std::string valid_estimator_tags();

struct CvGridSpec {
  double lo = 1e2;
  double hi = 1e7;
  int count = 25;
  double train_fraction = 0.5;
};

struct BenchConfig {
  ScenarioSpec scenario;      // scenario.seed is the master seed
  int runs = 20;
  std::vector<EstimatorTag> estimators{EstimatorTag::sh, EstimatorTag::ss};
  IdentConfig ident;          // lags are taken from the scenario
  CvGridSpec cv;
  AdmmOptions admm;
  Index horizon = 1000;
  int threads = 0;            // <= 0: hardware concurrency

  /// Defaults matched to a scenario (T, CV grid and split).
  static BenchConfig preset(ScenarioTag tag, Index samples, std::uint64_t seed, int runs);
  void validate() const;
};

struct RunRecord {
  int run = 0;
  std::uint64_t seed = 0;
  EstimatorTag estimator = EstimatorTag::sh;
  bool ok = false;
  std::string error;
  double fit = 0.0;
  Vector cod;                 // per-output validation COD (noise-free reference)
  double dsignal = 0.0;
  double dnoise = 0.0;
  bool sv_degenerate = false;
  Index order = -1;           // selected signal dimension (SH only)
  double seconds = 0.0;
};

struct Aggregate {
  EstimatorTag estimator = EstimatorTag::sh;
  std::string metric;
  double median = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
  int count = 0;
  int failures = 0;
};

struct MonteCarloReport {
  BenchConfig config;
  std::vector<RunRecord> records;     // run-major, estimators in config order
  std::vector<Aggregate> aggregates;  // metric-major, estimators in config order
};

/// Linear interpolation between order statistics; q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Evaluates every configured estimator on one generated scenario.
std::vector<RunRecord> run_single(const BenchConfig& config, int run);

MonteCarloReport run_monte_carlo(const BenchConfig& config);

std::string aggregate_csv(const MonteCarloReport& report);
std::string report_json(const MonteCarloReport& report);
/// Per-run FIT values, one row per (run, estimator).
std::string fit_distribution_csv(const MonteCarloReport& report);

}  // namespace hankelid
