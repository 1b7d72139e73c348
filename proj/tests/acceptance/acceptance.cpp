// Acceptance checks: one PASS/FAIL line per criterion.
//
//   mmue_acceptance [--only N]... [--work DIR]
//
// Exit status is 0 when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <fmt/format.h>

#include "mmue/estimate.hpp"
#include "mmue/gamp.hpp"
#include "mmue/harness.hpp"
#include "mmue/instance.hpp"
#include "mmue/io.hpp"
#include "mmue/limits.hpp"
#include "mmue/posterior.hpp"
#include "mmue/random.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace mmue;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Failures are collected with the first few reasons kept for the report.
struct Checker {
  int failures = 0;
  int checks = 0;
  std::vector<std::string> reasons;
  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (reasons.size() < 4) reasons.push_back(what);
  }
  Outcome outcome(const std::string& summary) const {
    Outcome o{failures == 0, summary};
    o.detail += fmt::format(" [{}/{} checks ok]", checks - failures, checks);
    for (const auto& r : reasons) o.detail += "; " + r;
    return o;
  }
};

const std::vector<double> kGridP = {0.01, 0.03, 0.1, 0.25, 0.5};

std::vector<double> snr_grid() {
  std::vector<double> v;
  for (int i = 0; i < 5; ++i) v.push_back(0.1 * std::pow(10.0, 0.75 * i));
  return v;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Outcome criterion1() {
  Checker c;
  double worst = 0.0;
  for (double p : kGridP)
    for (double ratio : snr_grid()) {
      const double var = 1.0, mu = var / ratio;
      const double w = mmwse_limit(p, var, mu, 1, 0.5), s = mmsue_limit(p, var, mu, 1);
      const double t1 = weighted_support_threshold(p, var, mu, 0.5), t0 = support_threshold(p, var, mu);
      const double d = std::max(rel_diff(w, 0.5 * s), rel_diff(t1, t0));
      worst = std::max(worst, d);
      c.expect(d <= 1e-12, fmt::format("p={} snr={:.3g} diff {:.3g}", p, ratio, d));
    }
  return c.outcome(fmt::format("max relative difference {:.3g}", worst));
}

Outcome criterion2() {
  Checker c;
  double worst = 0.0;
  for (double p : kGridP)
    for (double ratio : snr_grid()) {
      const double var = 1.0, mu = var / ratio;
      const double a = std::sqrt(std::max(0.0, support_threshold(p, var, mu)));
      const double b = oracle::support_boundary_bisect(p, var, mu, 0.5);
      const double d = std::abs(a - b);
      worst = std::max(worst, d);
      c.expect(d <= 1e-9, fmt::format("p={} snr={:.3g} |diff| {:.3g}", p, ratio, d));
    }
  return c.outcome(fmt::format("max |sqrt(tau) - bisection| {:.3g}", worst));
}

Outcome criterion3() {
  Checker c;
  Rng rng(derive_seed(31, 3));
  boost::random::uniform_01<double> u;
  double worst_mean = 0.0, worst_median = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double p = 0.01 + 0.49 * u(rng);
    const double mu = std::pow(10.0, -3.0 + 3.0 * u(rng));
    SignalPrior prior = SignalPrior::gaussian(p, 0.2 + 4.8 * u(rng));
    if (i % 2 == 1) prior = SignalPrior::weibull(p, 0.5 + 1.5 * u(rng), 0.5 + 1.5 * u(rng));
    const double q = (u(rng) < 0.5 ? 1.0 : -1.0) * 3.0 * u(rng);
    const Eigen::VectorXd qv = Eigen::VectorXd::Constant(1, q);
    const double gm = estimate_generic(ErrorMetric::squared(), prior, qv, mu)(0);
    const double mean = estimate_mean(prior, qv, mu)(0);
    const double ga = estimate_generic(ErrorMetric::absolute(), prior, qv, mu)(0);
    const double median = estimate_mmae(prior, qv, mu)(0);
    worst_mean = std::max(worst_mean, std::abs(gm - mean));
    worst_median = std::max(worst_median, std::abs(ga - median));
    c.expect(std::abs(gm - mean) <= 1e-6, fmt::format("draw {} mean gap {:.3g}", i, std::abs(gm - mean)));
    c.expect(std::abs(ga - median) <= 1e-6, fmt::format("draw {} median gap {:.3g}", i, std::abs(ga - median)));
  }
  return c.outcome(fmt::format("max gap mean {:.3g}, median {:.3g}", worst_mean, worst_median));
}

Outcome criterion4() {
  Checker c;
  const SignalPrior prior = SignalPrior::gaussian(0.03, 1.0);
  const std::vector<ErrorMetric> metrics = {ErrorMetric::absolute(), ErrorMetric::support(),
                                            ErrorMetric::weighted_support(0.3)};
  double worst = 0.0;
  std::size_t mi = 0;
  for (double mu : {1e-3, 1e-2, 1e-1}) {
    for (const DirectRow& r : run_scalar_channel_direct(prior, mu, 1000000, metrics, derive_seed(41, mi))) {
      const double z = std::abs(r.empirical - r.limit) / r.stderr_;
      worst = std::max(worst, z);
      c.expect(z <= 3.0, fmt::format("mu={} {} {} off by {:.2f} SE", mu, r.metric, r.quantity, z));
    }
    ++mi;
  }
  return c.outcome(fmt::format("largest deviation {:.2f} SE", worst));
}

// Criteria 5-8 write their CSVs under `dir` so criterion 9 can compare reruns.

Outcome criterion5(const fs::path& dir) {
  Checker c;
  const SignalPrior prior = SignalPrior::gaussian(0.25, 1.0);
  io::CsvTable t;
  t.columns = {"seed", "nmse"};
  double sum = 0.0, diff = 0.0, ref = 0.0;
  const int seeds = 50;
  for (int s = 0; s < seeds; ++s) {
    const Seed seed = derive_seed(51, static_cast<std::uint64_t>(s));
    const ProblemInstance inst = make_instance(prior, AwgnChannel{1e-3}, 8, 12, seed);
    const Eigen::VectorXd exact = oracle::enumerate_posterior_mean(inst.phi, inst.y, 0.25, 1.0, 1e-3);
    const ScalarChannelResult r = run_gamp(inst);
    const double e = (r.x_mmse - exact).squaredNorm(), n = exact.squaredNorm();
    sum += e / n;
    diff += e;
    ref += n;
    t.rows.push_back({std::to_string(seed), fmt::format("{:.17g}", e / n)});
  }
  io::write_csv(dir / "c5_enumeration.csv", t);
  const double avg = sum / seeds;
  c.expect(avg < 0.05, fmt::format("mean NMSE {:.4f}", avg));
  return c.outcome(fmt::format("mean per-seed NMSE {:.4f}, pooled {:.4f} (< 0.05)", avg, diff / ref));
}

ExperimentSpec fig5_spec(const fs::path& dir, int threads) {
  ExperimentSpec spec = preset("fig5");
  spec.trials = 20;
  spec.ratios = {0.2, 0.3, 0.4, 0.5};
  spec.output_dir = dir / "c6";
  spec.threads = threads;
  return spec;
}

Outcome criterion6(const fs::path& dir, int threads) {
  Checker c;
  const ExperimentSpec spec = fig5_spec(dir, threads);
  const ExperimentResult res = run_experiment(spec);
  write_outputs(spec, res);
  c.expect(res.failures() == 0, fmt::format("{} failed trials", res.failures()));
  std::string summary;
  double worst = 0.0;
  for (double ratio : spec.ratios)
    for (const ErrorMetric& m : spec.metrics) {
      const AggregateRow* opt = res.find(ratio, "optimal", m.name());
      const AggregateRow* lim = res.find(ratio, "limit", m.name());
      if (!opt || !lim) {
        c.expect(false, fmt::format("missing rows at {} {}", ratio, m.name()));
        continue;
      }
      const double rel = opt->mean / lim->mean - 1.0;
      worst = std::max(worst, std::abs(rel));
      summary += fmt::format(" {}@{}:{:+.1f}%", m.name(), ratio, 100.0 * rel);
      c.expect(std::abs(rel) <= 0.05,
               fmt::format("{} at M/N={}: {:.4g} vs limit {:.4g} ({:+.1f}%, SE {:.1f}%)", m.name(), ratio, opt->mean,
                           lim->mean, 100.0 * rel, 100.0 * opt->stderr_ / lim->mean));
    }
  return c.outcome(fmt::format("worst {:.1f}%;{}", 100.0 * worst, summary));
}

// Per-trial paired difference optimal - baseline for one sweep point and metric.
std::vector<double> paired(const ExperimentResult& res, double ratio, const std::string& metric,
                           const std::string& baseline) {
  std::map<int, double> opt, base;
  for (const TrialRecord& r : res.records) {
    if (r.ratio != ratio || r.metric != metric) continue;
    if (r.estimator == "optimal") opt[r.trial] = r.error;
    if (r.estimator == baseline) base[r.trial] = r.error;
  }
  std::vector<double> d;
  for (const auto& [trial, e] : opt)
    if (auto it = base.find(trial); it != base.end()) d.push_back(e - it->second);
  return d;
}

Outcome criterion7(const fs::path& dir, int threads) {
  Checker c;
  std::string summary;
  for (const char* name : {"fig3", "fig4"}) {
    ExperimentSpec spec = preset(name);
    spec.trials = 20;
    spec.output_dir = dir / fmt::format("c7_{}", name);
    spec.threads = threads;
    const ExperimentResult res = run_experiment(spec);
    write_outputs(spec, res);
    c.expect(res.failures() == 0, fmt::format("{}: {} failed trials", name, res.failures()));
    double worst = -INFINITY;
    for (double ratio : spec.ratios) {
      for (const char* metric : {"power:0.5", "absolute", "power:1.5"}) {
        const std::vector<double> d = paired(res, ratio, metric, "posterior_mean");
        if (d.size() < 2) {
          c.expect(false, fmt::format("{}: too few paired trials at {} {}", name, ratio, metric));
          continue;
        }
        double mean = 0.0, ss = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(d.size());
        for (double v : d) ss += (v - mean) * (v - mean);
        const double se = std::sqrt(ss / (d.size() - 1.0) / d.size());
        worst = std::max(worst, se > 0.0 ? mean / se : (mean > 0.0 ? INFINITY : 0.0));
        c.expect(mean <= se, fmt::format("{} {} at {}: optimal exceeds posterior mean by {:.3g} (SE {:.3g})", name,
                                         metric, ratio, mean, se));
      }
      if (spec.run_cosamp && ratio >= 0.3 - 1e-12)
        for (const char* metric : {"squared", "absolute"}) {
          const AggregateRow* cs = res.find(ratio, "cosamp", metric);
          const AggregateRow* opt = res.find(ratio, "optimal", metric);
          const AggregateRow* pm = res.find(ratio, "posterior_mean", metric);
          c.expect(cs && opt && pm && cs->mean > opt->mean && cs->mean > pm->mean,
                   fmt::format("{} {} at {}: CoSaMP not worse", name, metric, ratio));
        }
    }
    summary += fmt::format(" {}: max (optimal - posterior mean)/SE {:+.2f};", name, worst);
  }
  return c.outcome(summary);
}

double tpr_at(double fpr, double mu, double var) {
  // fpr = erfc(s / sqrt(2 mu)) and tpr = erfc(s / sqrt(2 (var + mu))) at threshold s.
  if (fpr <= 0.0) return 0.0;
  if (fpr >= 1.0) return 1.0;
  return boost::math::erfc(boost::math::erfc_inv(fpr) * std::sqrt(mu / (var + mu)));
}

Outcome criterion8(const fs::path& dir, int threads) {
  Checker c;
  ExperimentSpec spec = preset("fig6");
  spec.output_dir = dir / "c8";
  spec.threads = threads;
  const ExperimentResult res = run_experiment(spec);
  write_outputs(spec, res);
  c.expect(res.failures() == 0, fmt::format("{} failed trials", res.failures()));
  c.expect(spec.betas.size() == 25, "beta grid is not 25 points");
  std::map<std::size_t, std::vector<RocRow>> curves;
  for (const RocRow& r : res.roc) curves[r.ratio_index].push_back(r);
  const double var = std::get<GaussianSlab>(spec.prior.slab).variance;
  for (auto& [ri, rows] : curves) {
    std::sort(rows.begin(), rows.end(), [](const RocRow& a, const RocRow& b) { return a.beta < b.beta; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
      c.expect(rows[i].fpr_limit <= rows[i - 1].fpr_limit && rows[i].fnr_limit >= rows[i - 1].fnr_limit,
               fmt::format("ratio {} not monotone at beta {}", rows[i].ratio, rows[i].beta));
    }
    const RocRow& first = rows.front();
    const RocRow& last = rows.back();
    c.expect(first.beta == 0.0 && first.fpr_limit == 1.0 && first.fnr_limit == 0.0,
             fmt::format("ratio {}: beta=0 endpoint ({}, {})", first.ratio, first.fpr_limit, first.fnr_limit));
    c.expect(last.beta == 1.0 && last.fpr_limit == 0.0 && last.fnr_limit == 1.0,
             fmt::format("ratio {}: beta=1 endpoint ({}, {})", last.ratio, last.fpr_limit, last.fnr_limit));
  }
  // Dominance: each larger-M curve lies on or above every smaller-M curve at
  // the larger curve's false positive rates.
  for (auto hi = curves.begin(); hi != curves.end(); ++hi)
    for (auto lo = curves.begin(); lo != hi; ++lo) {
      const double mu_lo = lo->second.front().mean_mu;
      c.expect(hi->second.front().mean_mu < mu_lo,
               fmt::format("mu does not fall from ratio {} to {}", lo->second.front().ratio, hi->second.front().ratio));
      for (const RocRow& r : hi->second) {
        const double other = tpr_at(r.fpr_limit, mu_lo, var);
        c.expect(1.0 - r.fnr_limit >= other - 1e-12,
                 fmt::format("ratio {} below ratio {} at fpr {:.3g}", r.ratio, lo->second.front().ratio, r.fpr_limit));
      }
    }
  std::string mus;
  for (const auto& [ri, rows] : curves) mus += fmt::format(" mu({})={:.4g}", rows.front().ratio, rows.front().mean_mu);
  return c.outcome(fmt::format("{} curves x {} betas;{}", curves.size(), spec.betas.size(), mus));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every output file except wall-clock timings, relative to `root`.
std::set<fs::path> outputs(const fs::path& root) {
  std::set<fs::path> files;
  if (!fs::exists(root)) return files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != "timings.csv") files.insert(fs::relative(e.path(), root));
  return files;
}

Outcome criterion9(const fs::path& first, const fs::path& second, const std::set<int>& done) {
  // Reruns 5-8 with identical seeds but a different thread count.
  fs::remove_all(second);
  fs::create_directories(second);
  if (!done.count(5)) {
    fs::create_directories(first);
    criterion5(first);
  }
  criterion5(second);
  if (!done.count(6)) criterion6(first, 1);
  criterion6(second, 3);
  if (!done.count(7)) criterion7(first, 1);
  criterion7(second, 3);
  if (!done.count(8)) criterion8(first, 1);
  criterion8(second, 3);
  Checker c;
  const auto a = outputs(first), b = outputs(second);
  c.expect(a == b, "different file sets");
  std::size_t bytes = 0;
  for (const fs::path& f : a) {
    if (!b.count(f)) continue;
    const std::string x = slurp(first / f), y = slurp(second / f);
    bytes += x.size();
    c.expect(x == y, fmt::format("{} differs", f.string()));
  }
  return c.outcome(fmt::format("{} files, {} bytes compared", a.size(), bytes));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "mmue_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.insert(std::stoi(argv[++i]));
    } else if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only N]... [--work DIR]\n", argv[0]);
      return 1;
    }
  }
  const fs::path first = work / "run1", second = work / "run2";
  fs::remove_all(first);
  fs::create_directories(first);

  std::set<int> done;
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, [&] { return criterion5(first); }},
      {6, [&] { return criterion6(first, 1); }},
      {7, [&] { return criterion7(first, 1); }},
      {8, [&] { return criterion8(first, 1); }},
      {9, [&] { return criterion9(first, second, done); }},
  };
  int failed = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    done.insert(id);
    failed += !o.pass;
    std::printf("criterion %d: %s  %s (%.1f s)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
