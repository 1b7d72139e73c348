#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "mmue/error.hpp"
#include "mmue/harness.hpp"
#include "mmue/io.hpp"

using namespace mmue;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.n = 300;
  s.ratios = {0.3, 0.5};
  s.trials = 3;
  s.metrics = {ErrorMetric::squared(), ErrorMetric::absolute(), ErrorMetric::support()};
  s.betas = {0.0, 0.5, 1.0};
  return s;
}

}  // namespace

TEST(Harness, SquaredOptimalIsPosteriorMean) {
  ExperimentSpec s;
  s.n = 400;
  s.ratios = {0.4};
  s.trials = 1;
  const ExperimentResult r = run_experiment(s);
  ASSERT_EQ(r.records.size(), 3u);  // optimal, posterior_mean, cosamp
  EXPECT_EQ(r.records[0].estimator, "optimal");
  EXPECT_EQ(r.records[1].estimator, "posterior_mean");
  EXPECT_EQ(r.records[0].error, r.records[1].error);
}

TEST(Harness, AggregatesRecomputeFromRecords) {
  const ExperimentResult r = run_experiment(small_spec());
  for (const auto& a : r.aggregates) {
    std::vector<double> v;
    for (const auto& rec : r.records)
      if (rec.ratio_index == a.ratio_index && rec.estimator == a.estimator && rec.metric == a.metric)
        v.push_back(rec.error);
    ASSERT_EQ(static_cast<int>(v.size()), a.count);
    double mean = 0.0;
    for (double e : v) mean += e / v.size();
    double ss = 0.0;
    for (double e : v) ss += (e - mean) * (e - mean);
    EXPECT_NEAR(a.mean, mean, 1e-12 * std::max(1.0, mean));
    EXPECT_NEAR(a.stderr_, std::sqrt(ss / (v.size() - 1.0) / v.size()), 1e-12 * std::max(1.0, mean));
  }
  for (const auto& rec : r.records) {
    EXPECT_TRUE(std::isfinite(rec.error));
    EXPECT_GE(rec.error, 0.0);
  }
}

TEST(Harness, ThreadCountInvariantOutputs) {
  const fs::path base = fs::temp_directory_path() / "mmue_test_threads";
  fs::remove_all(base);
  ExperimentSpec a = small_spec(), b = small_spec();
  a.output_dir = base / "one";
  b.output_dir = base / "three";
  b.threads = 3;
  run_experiment(a);
  run_experiment(b);
  for (const char* f : {"records.csv", "aggregate.csv", "roc.csv", "diagnostics.csv", "squared.svg", "roc.svg"})
    EXPECT_EQ(slurp(a.output_dir / f), slurp(b.output_dir / f)) << f;
}

TEST(Harness, SeedsDependOnRatioAndTrial) {
  EXPECT_NE(trial_seed(1, 0, 1), trial_seed(1, 1, 0));
  EXPECT_NE(trial_seed(1, 0, 0), trial_seed(2, 0, 0));
  EXPECT_EQ(trial_seed(7, 3, 4), trial_seed(7, 3, 4));
}

TEST(Harness, ValidationRejectsBadSpecs) {
  ExperimentSpec s = small_spec();
  s.trials = 0;
  EXPECT_THROW(validate(s), InvalidArgument);
  s = small_spec();
  s.ratios = {};
  EXPECT_THROW(validate(s), InvalidArgument);
  s = small_spec();
  s.ratios = {1.2};
  EXPECT_THROW(validate(s), InvalidArgument);
  s = small_spec();
  s.betas = {-0.1};
  EXPECT_THROW(validate(s), InvalidArgument);
  EXPECT_THROW(preset("fig9"), InvalidArgument);
}

TEST(Harness, Fig3StyleWritesOnePanelPerMetric) {
  ExperimentSpec s = preset("fig3");
  s.n = 300;
  s.ratios = {0.3, 0.5};
  s.trials = 2;
  s.output_dir = fs::temp_directory_path() / "mmue_test_fig3";
  fs::remove_all(s.output_dir);
  run_experiment(s);
  for (const char* f : {"power_0.5.svg", "absolute.svg", "power_1.5.svg", "records.csv", "aggregate.csv"})
    EXPECT_TRUE(fs::exists(s.output_dir / f)) << f;
  const std::string header = "ratio_index,ratio,m,estimator,metric,count,mean,stderr,mean_mu\n";
  EXPECT_NE(slurp(s.output_dir / "aggregate.csv").find(header), std::string::npos);
}

TEST(Harness, DirectScenarioWritesTable) {
  ExperimentSpec s = preset("direct");
  s.mus = {0.01};
  s.samples = 20000;
  s.output_dir = fs::temp_directory_path() / "mmue_test_direct";
  fs::remove_all(s.output_dir);
  const ExperimentResult r = run_experiment(s);
  EXPECT_FALSE(r.direct.empty());
  EXPECT_TRUE(fs::exists(s.output_dir / "direct.csv"));
}
