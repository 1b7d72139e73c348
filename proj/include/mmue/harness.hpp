#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmue/channel.hpp"
#include "mmue/cosamp.hpp"
#include "mmue/gamp.hpp"
#include "mmue/metric.hpp"
#include "mmue/prior.hpp"

namespace mmue {

enum class Scenario { GaussianAwgn, WeibullPoisson, ScalarChannelDirect };

std::string to_string(Scenario s);
Scenario parse_scenario(const std::string& s);

/// Prior and channel of the two linear-system scenarios: 3% sparse N(0,1)
/// through AWGN at 20 dB, and 3% sparse Weibull(1, 0.5) through Poisson(100).
SignalPrior default_prior(Scenario s);
OutputChannel default_channel(Scenario s);

struct ExperimentSpec {
  Scenario scenario = Scenario::GaussianAwgn;
  SignalPrior prior = default_prior(Scenario::GaussianAwgn);
  OutputChannel channel = default_channel(Scenario::GaussianAwgn);
  Eigen::Index n = 2000;
  std::vector<double> ratios = {0.2, 0.3, 0.4, 0.5};
  int trials = 20;
  std::vector<ErrorMetric> metrics = {ErrorMetric::squared()};
  std::vector<double> betas;  // weighted-support sweep for ROC output
  Seed base_seed = 2013;
  GampConfig gamp;
  bool run_cosamp = true;  // AWGN scenarios only
  CosampConfig cosamp{0};  // sparsity_k <= 0 means ceil(pN)
  // ScalarChannelDirect only.
  std::vector<double> mus = {1e-3, 1e-2, 1e-1};
  Eigen::Index samples = 1000000;
  int threads = 1;
  std::filesystem::path output_dir;  // empty: keep results in memory only
  bool plots = true;
};

/// Throws InvalidArgument on out-of-range fields.
void validate(const ExperimentSpec& spec);

/// Named sweeps at desk scale (N = 2000, 20 trials,
/// 40 for fig5); `full_scale` switches to N = 10000 with 100 (fig5: 40) trials.
ExperimentSpec preset(const std::string& name, bool full_scale = false);

/// Seed of trial `trial` at sweep point `ratio_index`.
Seed trial_seed(Seed base, std::size_t ratio_index, std::size_t trial);

/// Number of measurements for a ratio: round(ratio N), at least 1.
Eigen::Index measurements(double ratio, Eigen::Index n);

struct TrialRecord {
  std::size_t ratio_index = 0;
  double ratio = 0.0;
  Eigen::Index m = 0;
  int trial = 0;
  Seed seed = 0;
  std::string estimator;  // optimal, posterior_mean, cosamp, limit
  std::string metric;
  double error = 0.0;  // total distortion D over the N components
  double mu = 0.0;
};

struct AggregateRow {
  std::size_t ratio_index = 0;
  double ratio = 0.0;
  Eigen::Index m = 0;
  std::string estimator;
  std::string metric;
  int count = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double mean_mu = 0.0;
};

struct RocRow {
  std::size_t ratio_index = 0;
  double ratio = 0.0;
  Eigen::Index m = 0;
  double beta = 0.0;
  double mean_mu = 0.0;
  double fpr_limit = 0.0;
  double fnr_limit = 0.0;
  double fpr_empirical = 0.0;
  double fnr_empirical = 0.0;
};

struct DiagnosticRow {
  std::size_t ratio_index = 0;
  double ratio = 0.0;
  Eigen::Index m = 0;
  int trial = 0;
  Seed seed = 0;
  std::string status;  // ok, diverged, error
  std::string detail;
  int gamp_iterations = 0;
  int floor_hits = 0;
  bool damped_retry = false;
  double mu = 0.0;
};

struct TimingRow {
  std::size_t ratio_index = 0;
  int trial = 0;
  double seconds = 0.0;
};

/// Result of the scalar-channel validation path.
struct DirectRow {
  double mu = 0.0;
  std::string metric;
  std::string quantity;  // error (per component), fpr, fnr
  Eigen::Index samples = 0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  double limit = 0.0;  // NaN when no limit formula applies
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  std::vector<AggregateRow> aggregates;
  std::vector<RocRow> roc;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<TimingRow> timings;
  std::vector<DirectRow> direct;

  const AggregateRow* find(double ratio, const std::string& estimator, const std::string& metric) const;
  std::size_t failures() const;
};

/// Runs every (ratio, trial) of the spec, aggregates and, when output_dir is
/// set, writes records.csv, aggregate.csv, diagnostics.csv, timings.csv,
/// roc.csv (with betas) and one SVG per metric.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Samples x from the prior and q = x + N(0, mu) directly, applies each
/// metric-optimal estimator and compares with the matching limit.
std::vector<DirectRow> run_scalar_channel_direct(const SignalPrior& prior, double mu, Eigen::Index samples,
                                                 const std::vector<ErrorMetric>& metrics, Seed seed);

/// Mean and standard error aggregation of trial records, ordered by
/// (ratio, estimator, metric) of first appearance.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

void write_outputs(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace mmue
