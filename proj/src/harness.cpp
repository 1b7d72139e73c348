#include "mmue/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include <boost/random/normal_distribution.hpp>
#include <fmt/format.h>

#include "mmue/error.hpp"
#include "mmue/estimate.hpp"
#include "mmue/instance.hpp"
#include "mmue/io.hpp"
#include "mmue/limits.hpp"
#include "mmue/svg_plot.hpp"

namespace mmue {
namespace fs = std::filesystem;

namespace {

struct TrialOutput {
  std::vector<TrialRecord> records;
  DiagnosticRow diag;
  TimingRow timing;
  std::vector<std::pair<double, double>> roc;  // (fpr, fnr) per beta
  bool ok = false;
};

bool has_support_limit(const SignalPrior& prior) {
  return prior.has_gaussian_slab() && prior.sparsity > 0.0 && prior.sparsity < 1.0;
}

// Limit value (total over N components) matching a metric, if one exists.
std::optional<double> limit_for(const ErrorMetric& metric, const SignalPrior& prior, double mu, Eigen::Index n) {
  switch (metric.kind()) {
    case ErrorMetric::Kind::Absolute: return mmae_limit(prior, mu, n);
    case ErrorMetric::Kind::Support:
      if (!has_support_limit(prior)) return std::nullopt;
      return mmsue_limit(prior.sparsity, std::get<GaussianSlab>(prior.slab).variance, mu, n);
    case ErrorMetric::Kind::WeightedSupport:
      if (!has_support_limit(prior)) return std::nullopt;
      return mmwse_limit(prior.sparsity, std::get<GaussianSlab>(prior.slab).variance, mu, n, metric.beta());
    default: return std::nullopt;
  }
}

// Support metrics compare zero patterns; amplitude estimates are used as is.
std::pair<double, double> support_rates(const Eigen::VectorXd& decision, const Eigen::VectorXd& x) {
  double zeros = 0, nonzeros = 0, fp = 0, fn = 0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x(j) == 0.0) {
      zeros += 1;
      if (decision(j) != 0.0) fp += 1;
    } else {
      nonzeros += 1;
      if (decision(j) == 0.0) fn += 1;
    }
  }
  return {zeros > 0 ? fp / zeros : 0.0, nonzeros > 0 ? fn / nonzeros : 0.0};
}

TrialOutput run_trial(const ExperimentSpec& spec, std::size_t ri, int trial) {
  TrialOutput out;
  const double ratio = spec.ratios[ri];
  const Eigen::Index m = measurements(ratio, spec.n);
  const Seed seed = trial_seed(spec.base_seed, ri, static_cast<std::size_t>(trial));
  out.diag = {ri, ratio, m, trial, seed, "ok", "", 0, 0, false, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemInstance inst = make_instance(spec.prior, spec.channel, m, spec.n, seed);
    const ScalarChannelResult g = run_gamp(inst, spec.gamp);
    out.diag.gamp_iterations = g.iterations_run;
    out.diag.floor_hits = g.floor_hits;
    out.diag.damped_retry = g.damped_retry;
    out.diag.mu = g.mu;

    std::optional<Eigen::VectorXd> cs;
    if (spec.run_cosamp && is_awgn(inst.channel)) {
      CosampConfig cfg = spec.cosamp;
      if (cfg.sparsity_k <= 0) cfg.sparsity_k = default_sparsity(spec.prior.sparsity, spec.n);
      cs = cosamp(inst, cfg).x;
    }
    auto add = [&](const std::string& est, const std::string& metric, double err) {
      out.records.push_back({ri, ratio, m, trial, seed, est, metric, err, g.mu});
    };
    for (const ErrorMetric& metric : spec.metrics) {
      const std::string name = metric.name();
      const Eigen::VectorXd opt =
          metric.kind() == ErrorMetric::Kind::Squared ? g.x_mmse : estimate(metric, spec.prior, g.q, g.mu);
      add("optimal", name, evaluate_error(metric, opt, inst.x));
      add("posterior_mean", name, evaluate_error(metric, g.x_mmse, inst.x));
      if (cs) add("cosamp", name, evaluate_error(metric, *cs, inst.x));
      if (const auto lim = limit_for(metric, spec.prior, g.mu, spec.n)) add("limit", name, *lim);
    }
    for (double beta : spec.betas)
      out.roc.push_back(support_rates(estimate_wsupport(spec.prior, g.q, g.mu, beta), inst.x));
    out.ok = true;
  } catch (const GampDivergence& e) {
    out.diag.status = "diverged";
    out.diag.detail = fmt::format("{} after {} iterations", e.what(), e.mu_trajectory().size());
    out.records.clear();
  } catch (const Error& e) {
    out.diag.status = "error";
    out.diag.detail = e.what();
    out.records.clear();
  }
  out.timing = {ri, trial, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
  return out;
}

std::vector<TrialOutput> run_all(const ExperimentSpec& spec) {
  const std::size_t per = static_cast<std::size_t>(spec.trials);
  const std::size_t jobs = spec.ratios.size() * per;
  std::vector<TrialOutput> outs(jobs);
  auto work = [&](std::size_t k) { outs[k] = run_trial(spec, k / per, static_cast<int>(k % per)); };
  const int threads = std::max(1, std::min<int>(spec.threads, static_cast<int>(jobs)));
  if (threads == 1) {
    for (std::size_t k = 0; k < jobs; ++k) work(k);
    return outs;
  }
  // Each job writes only its own slot, so the result does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < jobs; k = next++) work(k);
    });
  for (auto& th : pool) th.join();
  return outs;
}

std::string fmtd(double v) { return io::format_double(v); }

}  // namespace

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::GaussianAwgn: return "gaussian_awgn";
    case Scenario::WeibullPoisson: return "weibull_poisson";
    case Scenario::ScalarChannelDirect: return "scalar_channel_direct";
  }
  return {};
}

Scenario parse_scenario(const std::string& s) {
  if (s == "gaussian_awgn") return Scenario::GaussianAwgn;
  if (s == "weibull_poisson") return Scenario::WeibullPoisson;
  if (s == "scalar_channel_direct") return Scenario::ScalarChannelDirect;
  throw InvalidArgument(fmt::format("unknown scenario '{}'", s));
}

SignalPrior default_prior(Scenario s) {
  if (s == Scenario::WeibullPoisson) return SignalPrior::weibull(0.03, 1.0, 0.5);
  return SignalPrior::gaussian(0.03, 1.0);
}

OutputChannel default_channel(Scenario s) {
  if (s == Scenario::WeibullPoisson) return PoissonChannel{100.0};
  return AwgnChannel{3e-4};
}

void validate(const ExperimentSpec& spec) {
  validate(spec.prior);
  validate(spec.channel);
  validate(spec.gamp);
  if (spec.scenario == Scenario::ScalarChannelDirect) {
    if (spec.mus.empty()) throw InvalidArgument("experiment: mu list is empty");
    for (double mu : spec.mus)
      if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("experiment: every mu must be positive");
    if (spec.samples < 1) throw InvalidArgument("experiment: samples must be positive");
  } else {
    if (spec.n < 1) throw InvalidArgument("experiment: N must be positive");
    if (spec.ratios.empty()) throw InvalidArgument("experiment: ratio sweep is empty");
    for (double r : spec.ratios)
      if (!(r > 0.0 && r <= 1.0)) throw InvalidArgument(fmt::format("experiment: ratio {} outside (0, 1]", r));
    if (spec.trials < 1) throw InvalidArgument("experiment: trials must be at least 1");
    if (spec.prior.has_gaussian_slab() != is_awgn(spec.channel) && spec.scenario != Scenario::ScalarChannelDirect) {
      // Mixed combinations are allowed; nothing to check.
    }
  }
  if (spec.metrics.empty() && spec.betas.empty()) throw InvalidArgument("experiment: no metrics and no betas");
  for (double b : spec.betas)
    if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument(fmt::format("experiment: beta {} outside [0, 1]", b));
  if (!spec.betas.empty() && !has_support_limit(spec.prior) && spec.scenario != Scenario::ScalarChannelDirect) {
    // Empirical ROC still works; limits come out NaN.
  }
  if (spec.threads < 1) throw InvalidArgument("experiment: threads must be at least 1");
}

ExperimentSpec preset(const std::string& name, bool full_scale) {
  ExperimentSpec s;
  s.n = full_scale ? 10000 : 2000;
  s.trials = full_scale ? 100 : 20;
  const std::vector<ErrorMetric> fig34 = {ErrorMetric::power(0.5), ErrorMetric::absolute(), ErrorMetric::power(1.5),
                                          ErrorMetric::squared()};
  if (name == "fig3") {
    s.scenario = Scenario::GaussianAwgn;
    s.metrics = fig34;
  } else if (name == "fig4") {
    s.scenario = Scenario::WeibullPoisson;
    s.metrics = fig34;
    s.run_cosamp = false;
  } else if (name == "fig5") {
    s.scenario = Scenario::GaussianAwgn;
    s.trials = 40;
    s.ratios = {0.2, 0.3, 0.4, 0.5, 0.6};
    s.metrics = {ErrorMetric::absolute(), ErrorMetric::support(), ErrorMetric::weighted_support(0.3)};
    s.run_cosamp = false;
  } else if (name == "fig6") {
    s.scenario = Scenario::GaussianAwgn;
    s.ratios = {0.2, 0.3, 0.4};
    s.metrics = {};
    s.run_cosamp = false;
    for (int i = 0; i < 25; ++i) s.betas.push_back(static_cast<double>(i) / 24.0);
  } else if (name == "direct") {
    s.scenario = Scenario::ScalarChannelDirect;
    s.metrics = {ErrorMetric::absolute(), ErrorMetric::support(), ErrorMetric::weighted_support(0.3)};
  } else {
    throw InvalidArgument(fmt::format("unknown preset '{}' (fig3, fig4, fig5, fig6, direct)", name));
  }
  s.prior = default_prior(s.scenario);
  s.channel = default_channel(s.scenario);
  return s;
}

Seed trial_seed(Seed base, std::size_t ratio_index, std::size_t trial) {
  return derive_seed(base, ratio_index, trial);
}

Eigen::Index measurements(double ratio, Eigen::Index n) {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::llround(ratio * static_cast<double>(n))));
}

const AggregateRow* ExperimentResult::find(double ratio, const std::string& estimator, const std::string& metric) const {
  for (const auto& a : aggregates)
    if (a.ratio == ratio && a.estimator == estimator && a.metric == metric) return &a;
  return nullptr;
}

std::size_t ExperimentResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(diagnostics.begin(), diagnostics.end(), [](const DiagnosticRow& d) { return d.status != "ok"; }));
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
  std::vector<AggregateRow> rows;
  std::map<std::tuple<std::size_t, std::string, std::string>, std::size_t> index;
  std::vector<std::vector<const TrialRecord*>> groups;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.ratio_index, r.estimator, r.metric);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back({r.ratio_index, r.ratio, r.m, r.estimator, r.metric, 0, 0.0, 0.0, 0.0});
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& g = groups[i];
    // Reduce in trial order whatever order the records arrived in.
    std::sort(g.begin(), g.end(), [](const TrialRecord* a, const TrialRecord* b) { return a->trial < b->trial; });
    const double n = static_cast<double>(g.size());
    double sum = 0.0, mu = 0.0;
    for (const auto* r : g) {
      sum += r->error;
      mu += r->mu;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto* r : g) ss += (r->error - mean) * (r->error - mean);
    rows[i].count = static_cast<int>(g.size());
    rows[i].mean = mean;
    rows[i].stderr_ = g.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    rows[i].mean_mu = mu / n;
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AggregateRow& a, const AggregateRow& b) { return a.ratio_index < b.ratio_index; });
  return rows;
}

std::vector<DirectRow> run_scalar_channel_direct(const SignalPrior& prior, double mu, Eigen::Index samples,
                                                 const std::vector<ErrorMetric>& metrics, Seed seed) {
  validate(prior);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("direct: mu must be positive");
  if (samples < 1) throw InvalidArgument("direct: samples must be positive");
  const Eigen::VectorXd x = sample_signal(prior, samples, derive_seed(seed, 1));
  Eigen::VectorXd q(samples);
  {
    Rng rng(derive_seed(seed, 2));
    boost::random::normal_distribution<double> noise(0.0, std::sqrt(mu));
    for (Eigen::Index j = 0; j < samples; ++j) q(j) = x(j) + noise(rng);
  }
  const double dn = static_cast<double>(samples);
  std::vector<DirectRow> rows;
  for (const ErrorMetric& metric : metrics) {
    const Eigen::VectorXd est = estimate(metric, prior, q, mu);
    double sum = 0.0;
    for (Eigen::Index j = 0; j < samples; ++j) sum += metric(est(j), x(j));
    const double mean = sum / dn;
    double ss = 0.0;
    for (Eigen::Index j = 0; j < samples; ++j) {
      const double d = metric(est(j), x(j)) - mean;
      ss += d * d;
    }
    double lim = std::numeric_limits<double>::quiet_NaN();
    if (const auto l = limit_for(metric, prior, mu, 1)) lim = *l;
    else if (!metric.is_support()) lim = mmue_scalar(prior, mu, metric);
    rows.push_back({mu, metric.name(), "error", samples, mean, std::sqrt(ss / (dn - 1.0) / dn), lim});

    if (metric.is_support()) {
      const auto [fpr, fnr] = support_rates(est, x);
      double zeros = 0;
      for (Eigen::Index j = 0; j < samples; ++j) zeros += x(j) == 0.0 ? 1.0 : 0.0;
      const double nonzeros = dn - zeros;
      RocPoint rp{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
      if (has_support_limit(prior)) {
        const double beta = metric.kind() == ErrorMetric::Kind::Support ? 0.5 : metric.beta();
        rp = roc_point(prior.sparsity, std::get<GaussianSlab>(prior.slab).variance, mu, beta);
      }
      rows.push_back({mu, metric.name(), "fpr", samples, fpr, std::sqrt(fpr * (1.0 - fpr) / zeros), rp.fpr});
      rows.push_back({mu, metric.name(), "fnr", samples, fnr, std::sqrt(fnr * (1.0 - fnr) / nonzeros), rp.fnr});
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  ExperimentResult res;
  if (spec.scenario == Scenario::ScalarChannelDirect) {
    for (std::size_t i = 0; i < spec.mus.size(); ++i) {
      auto rows = run_scalar_channel_direct(spec.prior, spec.mus[i], spec.samples, spec.metrics,
                                            derive_seed(spec.base_seed, i));
      res.direct.insert(res.direct.end(), rows.begin(), rows.end());
    }
    if (!spec.output_dir.empty()) write_outputs(spec, res);
    return res;
  }

  std::vector<TrialOutput> outs = run_all(spec);
  const std::size_t per = static_cast<std::size_t>(spec.trials);
  for (auto& o : outs) {
    res.records.insert(res.records.end(), o.records.begin(), o.records.end());
    res.diagnostics.push_back(o.diag);
    res.timings.push_back(o.timing);
  }
  res.aggregates = aggregate(res.records);

  for (std::size_t ri = 0; ri < spec.ratios.size(); ++ri) {
    double mu = 0.0;
    int ok = 0;
    for (std::size_t t = 0; t < per; ++t) {
      const auto& o = outs[ri * per + t];
      if (!o.ok) continue;
      mu += o.diag.mu;
      ++ok;
    }
    if (ok == 0) continue;
    mu /= ok;
    for (std::size_t b = 0; b < spec.betas.size(); ++b) {
      RocRow row{ri, spec.ratios[ri], measurements(spec.ratios[ri], spec.n), spec.betas[b], mu,
                 std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0};
      if (has_support_limit(spec.prior)) {
        const RocPoint rp =
            roc_point(spec.prior.sparsity, std::get<GaussianSlab>(spec.prior.slab).variance, mu, spec.betas[b]);
        row.fpr_limit = rp.fpr;
        row.fnr_limit = rp.fnr;
      }
      for (std::size_t t = 0; t < per; ++t) {
        const auto& o = outs[ri * per + t];
        if (!o.ok) continue;
        row.fpr_empirical += o.roc[b].first / ok;
        row.fnr_empirical += o.roc[b].second / ok;
      }
      res.roc.push_back(row);
    }
  }
  if (!spec.output_dir.empty()) write_outputs(spec, res);
  return res;
}

void write_outputs(const ExperimentSpec& spec, const ExperimentResult& res) {
  const fs::path dir = spec.output_dir;
  fs::create_directories(dir);
  const std::string scen = to_string(spec.scenario);

  if (spec.scenario == Scenario::ScalarChannelDirect) {
    io::CsvTable t;
    t.meta = io::prior_meta(spec.prior);
    t.meta.emplace_back("base_seed", std::to_string(spec.base_seed));
    t.columns = {"mu", "metric", "quantity", "samples", "empirical", "stderr", "limit"};
    for (const auto& r : res.direct)
      t.rows.push_back({fmtd(r.mu), r.metric, r.quantity, std::to_string(r.samples), fmtd(r.empirical),
                        fmtd(r.stderr_), fmtd(r.limit)});
    io::write_csv(dir / "direct.csv", t);
    return;
  }

  auto meta = io::prior_meta(spec.prior);
  for (auto& kv : io::channel_meta(spec.channel)) meta.push_back(kv);
  meta.emplace_back("scenario", scen);
  meta.emplace_back("n", std::to_string(spec.n));
  meta.emplace_back("trials", std::to_string(spec.trials));
  meta.emplace_back("base_seed", std::to_string(spec.base_seed));

  io::CsvTable rec;
  rec.meta = meta;
  rec.columns = {"ratio_index", "ratio", "m", "trial", "seed", "estimator", "metric", "error", "mu"};
  for (const auto& r : res.records)
    rec.rows.push_back({std::to_string(r.ratio_index), fmtd(r.ratio), std::to_string(r.m), std::to_string(r.trial),
                        std::to_string(r.seed), r.estimator, r.metric, fmtd(r.error), fmtd(r.mu)});
  io::write_csv(dir / "records.csv", rec);

  io::CsvTable agg;
  agg.meta = meta;
  agg.columns = {"ratio_index", "ratio", "m", "estimator", "metric", "count", "mean", "stderr", "mean_mu"};
  for (const auto& a : res.aggregates)
    agg.rows.push_back({std::to_string(a.ratio_index), fmtd(a.ratio), std::to_string(a.m), a.estimator, a.metric,
                        std::to_string(a.count), fmtd(a.mean), fmtd(a.stderr_), fmtd(a.mean_mu)});
  io::write_csv(dir / "aggregate.csv", agg);

  io::CsvTable diag;
  diag.meta = meta;
  diag.columns = {"ratio_index", "ratio", "m", "trial", "seed", "status", "gamp_iterations", "floor_hits",
                  "damped_retry", "mu", "detail"};
  for (const auto& d : res.diagnostics) {
    std::string detail = d.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    diag.rows.push_back({std::to_string(d.ratio_index), fmtd(d.ratio), std::to_string(d.m), std::to_string(d.trial),
                         std::to_string(d.seed), d.status, std::to_string(d.gamp_iterations),
                         std::to_string(d.floor_hits), d.damped_retry ? "1" : "0", fmtd(d.mu), detail});
  }
  io::write_csv(dir / "diagnostics.csv", diag);

  io::CsvTable tim;
  tim.columns = {"ratio_index", "trial", "seconds"};
  for (const auto& t : res.timings)
    tim.rows.push_back({std::to_string(t.ratio_index), std::to_string(t.trial), fmt::format("{:.6f}", t.seconds)});
  io::write_csv(dir / "timings.csv", tim);

  if (!res.roc.empty()) {
    io::CsvTable roc;
    roc.meta = meta;
    roc.columns = {"ratio_index", "ratio", "m", "beta", "mean_mu", "fpr", "fnr", "tpr", "fpr_empirical", "fnr_empirical"};
    for (const auto& r : res.roc)
      roc.rows.push_back({std::to_string(r.ratio_index), fmtd(r.ratio), std::to_string(r.m), fmtd(r.beta),
                          fmtd(r.mean_mu), fmtd(r.fpr_limit), fmtd(r.fnr_limit), fmtd(1.0 - r.fnr_limit),
                          fmtd(r.fpr_empirical), fmtd(r.fnr_empirical)});
    io::write_csv(dir / "roc.csv", roc);
  }

  if (!spec.plots) return;
  const double dn = static_cast<double>(spec.n);
  for (const ErrorMetric& metric : spec.metrics) {
    std::vector<plot::Series> series;
    for (const std::string est : {"optimal", "posterior_mean", "cosamp", "limit"}) {
      plot::Series s;
      s.label = est;
      s.dashed = est == "limit";
      for (const auto& a : res.aggregates) {
        if (a.estimator != est || a.metric != metric.name()) continue;
        s.x.push_back(a.ratio);
        s.y.push_back(a.mean / dn);
        s.err.push_back(a.stderr_ / dn);
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    plot::Axes axes;
    axes.title = fmt::format("{}: {}", scen, metric.name());
    axes.x_label = "M/N";
    axes.y_label = "error per component";
    axes.log_y = true;
    std::string file = metric.name();
    std::replace(file.begin(), file.end(), ':', '_');
    plot::write_svg(dir / (file + ".svg"), axes, series);
  }
  if (!res.roc.empty() && has_support_limit(spec.prior)) {
    std::vector<plot::Series> series;
    for (std::size_t ri = 0; ri < spec.ratios.size(); ++ri) {
      plot::Series lim, emp;
      lim.label = fmt::format("limit M/N={}", spec.ratios[ri]);
      emp.label = fmt::format("empirical M/N={}", spec.ratios[ri]);
      emp.dashed = true;
      for (const auto& r : res.roc) {
        if (r.ratio_index != ri) continue;
        lim.x.push_back(r.fpr_limit);
        lim.y.push_back(1.0 - r.fnr_limit);
        emp.x.push_back(r.fpr_empirical);
        emp.y.push_back(1.0 - r.fnr_empirical);
      }
      if (!lim.x.empty()) {
        series.push_back(std::move(lim));
        series.push_back(std::move(emp));
      }
    }
    if (!series.empty()) {
      plot::Axes axes;
      axes.title = fmt::format("{}: ROC", scen);
      axes.x_label = "false positive rate";
      axes.y_label = "true positive rate";
      plot::write_svg(dir / "roc.svg", axes, series);
    }
  }
}

}  // namespace mmue
