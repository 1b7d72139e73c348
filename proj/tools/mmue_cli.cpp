// mmue: command-line front end for instance generation, GAMP, estimation,
// limits and the experiment harness.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mmue/error.hpp"
#include "mmue/estimate.hpp"
#include "mmue/gamp.hpp"
#include "mmue/harness.hpp"
#include "mmue/instance.hpp"
#include "mmue/io.hpp"
#include "mmue/limits.hpp"
#include "mmue/svg_plot.hpp"

namespace fs = std::filesystem;
using namespace mmue;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

struct PriorOptions {
  std::optional<double> sparsity;
  std::optional<std::string> slab;
  std::optional<double> slab_variance;
  std::optional<double> slab_scale;
  std::optional<double> slab_shape;

  void add(CLI::App* app) {
    app->add_option("--sparsity", sparsity, "Probability p of a nonzero component");
    app->add_option("--slab", slab, "Slab family")->check(CLI::IsMember({"gaussian", "weibull"}));
    app->add_option("--slab-variance", slab_variance, "Gaussian slab variance");
    app->add_option("--slab-scale", slab_scale, "Weibull slab scale");
    app->add_option("--slab-shape", slab_shape, "Weibull slab shape");
  }

  bool given() const { return sparsity || slab || slab_variance || slab_scale || slab_shape; }

  SignalPrior apply(SignalPrior prior) const {
    if (sparsity) prior.sparsity = *sparsity;
    if (slab && *slab == "gaussian" && !prior.has_gaussian_slab()) prior.slab = GaussianSlab{};
    if (slab && *slab == "weibull" && prior.has_gaussian_slab()) prior.slab = WeibullSlab{};
    if (auto* g = std::get_if<GaussianSlab>(&prior.slab)) {
      if (slab_variance) g->variance = *slab_variance;
      if (slab_scale || slab_shape) throw InvalidArgument("--slab-scale/--slab-shape need --slab weibull");
    } else {
      auto& w = std::get<WeibullSlab>(prior.slab);
      if (slab_scale) w.scale = *slab_scale;
      if (slab_shape) w.shape = *slab_shape;
      if (slab_variance) throw InvalidArgument("--slab-variance needs --slab gaussian");
    }
    validate(prior);
    return prior;
  }
};

struct ChannelOptions {
  std::optional<std::string> channel;
  std::optional<double> noise_variance;
  std::optional<double> poisson_scale;

  void add(CLI::App* app) {
    app->add_option("--channel", channel, "Output channel")->check(CLI::IsMember({"awgn", "poisson"}));
    app->add_option("--noise-variance", noise_variance, "AWGN noise variance");
    app->add_option("--poisson-scale", poisson_scale, "Poisson scale alpha");
  }

  OutputChannel apply(OutputChannel ch) const {
    if (channel && *channel == "awgn" && !is_awgn(ch)) ch = AwgnChannel{};
    if (channel && *channel == "poisson" && is_awgn(ch)) ch = PoissonChannel{};
    if (auto* a = std::get_if<AwgnChannel>(&ch)) {
      if (noise_variance) a->noise_variance = *noise_variance;
      if (poisson_scale) throw InvalidArgument("--poisson-scale needs --channel poisson");
    } else {
      auto& p = std::get<PoissonChannel>(ch);
      if (poisson_scale) p.scale = *poisson_scale;
      if (noise_variance) throw InvalidArgument("--noise-variance needs --channel awgn");
    }
    validate(ch);
    return ch;
  }
};

struct GampOptions {
  std::optional<int> max_iterations;
  std::optional<double> damping;
  std::optional<double> stop_tolerance;
  std::optional<std::string> mean_removal;

  void add(CLI::App* app) {
    app->add_option("--max-iterations", max_iterations, "GAMP iteration cap");
    app->add_option("--damping", damping, "GAMP damping in (0, 1]");
    app->add_option("--stop-tolerance", stop_tolerance, "Relative change in mu that stops GAMP");
    app->add_option("--mean-removal", mean_removal, "Mean-removed operator")
        ->check(CLI::IsMember({"auto", "on", "off"}));
  }

  GampConfig apply(GampConfig c) const {
    if (max_iterations) c.max_iterations = *max_iterations;
    if (damping) c.damping = *damping;
    if (stop_tolerance) c.stop_tolerance = *stop_tolerance;
    if (mean_removal)
      c.mean_removal = *mean_removal == "on" ? MeanRemoval::On : *mean_removal == "off" ? MeanRemoval::Off : MeanRemoval::Auto;
    validate(c);
    return c;
  }
};

std::vector<ErrorMetric> parse_metrics(const std::vector<std::string>& names) {
  std::vector<ErrorMetric> out;
  for (const auto& n : names) out.push_back(ErrorMetric::parse(n));
  return out;
}

// Limit per metric; n scales per-component values to a length-n vector.
double limit_value(const SignalPrior& prior, double mu, const ErrorMetric& metric, std::int64_t n) {
  const bool gauss = prior.has_gaussian_slab();
  switch (metric.kind()) {
    case ErrorMetric::Kind::Absolute: return mmae_limit(prior, mu, n);
    case ErrorMetric::Kind::Support:
      if (!gauss) throw InvalidArgument("support limit needs a Gaussian slab");
      return mmsue_limit(prior.sparsity, std::get<GaussianSlab>(prior.slab).variance, mu, n);
    case ErrorMetric::Kind::WeightedSupport:
      if (!gauss) throw InvalidArgument("weighted-support limit needs a Gaussian slab");
      return mmwse_limit(prior.sparsity, std::get<GaussianSlab>(prior.slab).variance, mu, n, metric.beta());
    default: return static_cast<double>(n) * mmue_scalar(prior, mu, metric);
  }
}

void emit(const io::CsvTable& table, const std::string& out) {
  if (!out.empty()) {
    io::write_csv(out, table);
    return;
  }
  for (const auto& [k, v] : table.meta) std::cout << "# " << k << "=" << v << '\n';
  std::cout << fmt::format("{}\n", fmt::join(table.columns, ","));
  for (const auto& row : table.rows) std::cout << fmt::format("{}\n", fmt::join(row, ","));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metric-optimal sparse estimation: GAMP, estimators, limits and experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "Config file: key = value lines under an [experiment] section");

  PriorOptions prior_opts;
  ChannelOptions channel_opts;
  GampOptions gamp_opts;

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a problem instance and save it to a directory");
  Eigen::Index gen_m = 600, gen_n = 2000;
  Seed gen_seed = 2013;
  std::string gen_scenario = "gaussian_awgn", gen_out;
  gen->add_option("--scenario", gen_scenario, "Default prior and channel")
      ->check(CLI::IsMember({"gaussian_awgn", "weibull_poisson"}));
  gen->add_option("-m,--m", gen_m, "Number of measurements")->check(CLI::PositiveNumber);
  gen->add_option("-n,--n", gen_n, "Signal length")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Instance seed");
  gen->add_option("-o,--out", gen_out, "Output directory")->required();

  // gamp
  auto* gmp = app.add_subcommand("gamp", "Run GAMP on a saved instance");
  std::string gmp_instance, gmp_out;
  gmp->add_option("-i,--instance", gmp_instance, "Instance directory")->required()->check(CLI::ExistingDirectory);
  gmp->add_option("-o,--out", gmp_out, "Output CSV (index, q, x_mmse, x_var)")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "Metric-optimal estimate from a GAMP result");
  std::string est_gamp, est_instance, est_metric = "squared", est_out;
  est->add_option("-g,--gamp", est_gamp, "GAMP result CSV")->required()->check(CLI::ExistingFile);
  est->add_option("-i,--instance", est_instance, "Instance directory providing the prior")->check(CLI::ExistingDirectory);
  est->add_option("--metric", est_metric, "squared, absolute, power:<p>, support, wsupport:<beta>");
  est->add_option("-o,--out", est_out, "Output CSV (index, estimate)")->required();

  // limit
  auto* lim = app.add_subcommand("limit", "Minimum achievable error in the scalar channel");
  std::vector<double> lim_mu = {1e-2};
  std::vector<std::string> lim_metrics = {"absolute"};
  std::int64_t lim_n = 1;
  std::string lim_out;
  lim->add_option("--mu", lim_mu, "Scalar channel noise variance(s)")->check(CLI::PositiveNumber);
  lim->add_option("--metric", lim_metrics, "Metric(s)");
  lim->add_option("-n,--n", lim_n, "Signal length (1 gives per-component values)")->check(CLI::PositiveNumber);
  lim->add_option("-o,--out", lim_out, "Output CSV (stdout if omitted)");

  // roc
  auto* roc = app.add_subcommand("roc", "Limit ROC curve of the weighted-support decision");
  double roc_mu = 1e-2;
  int roc_points = 25;
  std::vector<double> roc_betas;
  std::string roc_out;
  roc->add_option("--mu", roc_mu, "Scalar channel noise variance")->check(CLI::PositiveNumber);
  roc->add_option("--points", roc_points, "Number of evenly spaced beta values in [0, 1]")->check(CLI::Range(2, 100000));
  roc->add_option("--betas", roc_betas, "Explicit beta values (overrides --points)");
  roc->add_option("-o,--out", roc_out, "Output CSV (stdout if omitted)");

  for (auto* sub : {gen, est, lim, roc}) prior_opts.add(sub);
  channel_opts.add(gen);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a seeded sweep and write CSV tables and SVG plots");
  std::optional<std::string> x_preset, x_scenario;
  bool x_full = false, x_no_cosamp = false, x_no_plots = false;
  std::optional<Eigen::Index> x_n, x_samples, x_cosamp_k;
  std::optional<int> x_trials;
  std::optional<std::vector<double>> x_ratios, x_betas, x_mus;
  std::optional<std::vector<std::string>> x_metrics;
  std::optional<Seed> x_seed;
  int x_threads = 1;
  std::string x_out = "results";
  exp->add_option("--preset", x_preset, "fig3, fig4, fig5, fig6 or direct");
  exp->add_flag("--full-scale", x_full, "Use N = 10000 and full-scale trial counts with --preset");
  exp->add_option("--scenario", x_scenario, "gaussian_awgn, weibull_poisson or scalar_channel_direct");
  exp->add_option("-n,--n", x_n, "Signal length");
  exp->add_option("--ratios", x_ratios, "M/N sweep");
  exp->add_option("--trials", x_trials, "Trials per sweep point");
  exp->add_option("--metrics", x_metrics, "Metrics to evaluate");
  exp->add_option("--betas", x_betas, "Weighted-support beta sweep for ROC output");
  exp->add_option("--seed", x_seed, "Base seed");
  exp->add_option("--mus", x_mus, "Scalar channel noise variances (direct scenario)");
  exp->add_option("--samples", x_samples, "Samples per mu (direct scenario)");
  exp->add_flag("--no-cosamp", x_no_cosamp, "Skip the CoSaMP baseline");
  exp->add_option("--cosamp-k", x_cosamp_k, "CoSaMP sparsity (default ceil(pN))");
  exp->add_option("--threads", x_threads, "Worker threads")->check(CLI::PositiveNumber);
  exp->add_option("-o,--output-dir", x_out, "Output directory");
  exp->add_flag("--no-plots", x_no_plots, "Skip SVG output");
  prior_opts.add(exp);
  channel_opts.add(exp);
  gamp_opts.add(exp);
  gamp_opts.add(gmp);

  // plot
  auto* plt = app.add_subcommand("plot", "Plot one metric of an aggregate.csv against M/N");
  std::string plt_in, plt_metric = "squared", plt_out, plt_title;
  bool plt_linear = false;
  plt->add_option("-a,--aggregate", plt_in, "aggregate.csv from an experiment")->required()->check(CLI::ExistingFile);
  plt->add_option("--metric", plt_metric, "Metric name as it appears in the table");
  plt->add_option("-o,--out", plt_out, "Output SVG")->required();
  plt->add_option("--title", plt_title, "Plot title");
  plt->add_flag("--linear", plt_linear, "Linear y axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }

  auto stage = [](auto&& fn) -> int {
    try {
      return fn();
    } catch (const InvalidArgument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kInvalid;
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kInvalid;
    } catch (const std::exception& e) {
      std::cerr << "runtime failure: " << e.what() << '\n';
      return kRuntime;
    }
  };

  if (*gen) {
    return stage([&] {
      const Scenario sc = parse_scenario(gen_scenario);
      const SignalPrior prior = prior_opts.apply(default_prior(sc));
      const OutputChannel ch = channel_opts.apply(default_channel(sc));
      const ProblemInstance inst = make_instance(prior, ch, gen_m, gen_n, gen_seed);
      io::save_instance(gen_out, inst);
      return kOk;
    });
  }

  if (*gmp) {
    int code = stage([&] {
      const GampConfig cfg = gamp_opts.apply({});
      const ProblemInstance inst = io::load_instance(gmp_instance);
      io::write_gamp_result(gmp_out, run_gamp(inst, cfg));
      return kOk;
    });
    return code;
  }

  if (*est) {
    return stage([&] {
      SignalPrior prior = default_prior(Scenario::GaussianAwgn);
      if (!est_instance.empty()) prior = io::load_instance(est_instance).prior;
      else if (!prior_opts.given())
        throw InvalidArgument("estimate: give --instance or the prior flags");
      prior = prior_opts.apply(prior);
      const ErrorMetric metric = ErrorMetric::parse(est_metric);
      const ScalarChannelResult g = io::read_gamp_result(est_gamp);
      const Eigen::VectorXd x_hat =
          metric.kind() == ErrorMetric::Kind::Squared ? g.x_mmse : estimate(metric, prior, g.q, g.mu);
      io::write_estimate(est_out, x_hat, {{"metric", metric.name()}, {"mu", io::format_double(g.mu)}});
      return kOk;
    });
  }

  if (*lim) {
    return stage([&] {
      const SignalPrior prior = prior_opts.apply(default_prior(Scenario::GaussianAwgn));
      io::CsvTable t;
      t.meta = io::prior_meta(prior);
      t.columns = {"mu", "metric", "n", "limit"};
      for (double mu : lim_mu)
        for (const auto& m : parse_metrics(lim_metrics))
          t.rows.push_back({io::format_double(mu), m.name(), std::to_string(lim_n),
                            io::format_double(limit_value(prior, mu, m, lim_n))});
      emit(t, lim_out);
      return kOk;
    });
  }

  if (*roc) {
    return stage([&] {
      const SignalPrior prior = prior_opts.apply(default_prior(Scenario::GaussianAwgn));
      if (!prior.has_gaussian_slab()) throw InvalidArgument("roc: needs a Gaussian slab");
      const double var = std::get<GaussianSlab>(prior.slab).variance;
      std::vector<double> betas = roc_betas;
      if (betas.empty())
        for (int i = 0; i < roc_points; ++i) betas.push_back(static_cast<double>(i) / (roc_points - 1));
      io::CsvTable t;
      t.meta = io::prior_meta(prior);
      t.meta.emplace_back("mu", io::format_double(roc_mu));
      t.columns = {"beta", "fpr", "fnr", "tpr"};
      for (double b : betas) {
        if (!(b >= 0.0 && b <= 1.0)) throw InvalidArgument(fmt::format("roc: beta {} outside [0, 1]", b));
        const RocPoint rp = roc_point(prior.sparsity, var, roc_mu, b);
        t.rows.push_back({io::format_double(b), io::format_double(rp.fpr), io::format_double(rp.fnr),
                          io::format_double(rp.tpr())});
      }
      emit(t, roc_out);
      return kOk;
    });
  }

  if (*exp) {
    ExperimentSpec spec;
    int code = stage([&] {
      if (x_preset) {
        spec = preset(*x_preset, x_full);
      } else if (x_scenario) {
        spec.scenario = parse_scenario(*x_scenario);
        spec.prior = default_prior(spec.scenario);
        spec.channel = default_channel(spec.scenario);
        spec.run_cosamp = spec.scenario == Scenario::GaussianAwgn;
      }
      if (x_preset && x_scenario && parse_scenario(*x_scenario) != spec.scenario)
        throw InvalidArgument("--scenario conflicts with --preset");
      spec.prior = prior_opts.apply(spec.prior);
      spec.channel = channel_opts.apply(spec.channel);
      spec.gamp = gamp_opts.apply(spec.gamp);
      if (x_n) spec.n = *x_n;
      if (x_ratios) spec.ratios = *x_ratios;
      if (x_trials) spec.trials = *x_trials;
      if (x_metrics) spec.metrics = parse_metrics(*x_metrics);
      if (x_betas) spec.betas = *x_betas;
      if (x_seed) spec.base_seed = *x_seed;
      if (x_mus) spec.mus = *x_mus;
      if (x_samples) spec.samples = *x_samples;
      if (x_no_cosamp) spec.run_cosamp = false;
      if (x_cosamp_k) spec.cosamp.sparsity_k = *x_cosamp_k;
      if (spec.run_cosamp && spec.cosamp.sparsity_k > 0) validate(spec.cosamp, spec.n);
      spec.threads = x_threads;
      spec.output_dir = x_out;
      spec.plots = !x_no_plots;
      validate(spec);
      return kOk;
    });
    if (code != kOk) return code;
    return stage([&] {
      const ExperimentResult res = run_experiment(spec);
      const std::size_t failed = res.failures();
      if (failed > 0)
        std::cerr << fmt::format("warning: {} of {} trials failed; see {}\n", failed, res.diagnostics.size(),
                                 (spec.output_dir / "diagnostics.csv").string());
      // A sweep point with no surviving trial has no aggregate: report failure.
      for (std::size_t ri = 0; ri < spec.ratios.size() && spec.scenario != Scenario::ScalarChannelDirect; ++ri) {
        bool any = false;
        for (const auto& d : res.diagnostics) any = any || (d.ratio_index == ri && d.status == "ok");
        if (!any) {
          std::cerr << fmt::format("runtime failure: every trial at M/N = {} failed\n", spec.ratios[ri]);
          return kRuntime;
        }
      }
      return kOk;
    });
  }

  if (*plt) {
    return stage([&] {
      const io::CsvTable t = io::read_csv(plt_in);
      const auto& cols = t.columns;
      auto col = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) throw ParseError(fmt::format("{}: missing column '{}'", plt_in, name));
        return static_cast<std::size_t>(it - cols.begin());
      };
      const std::size_t c_ratio = col("ratio"), c_est = col("estimator"), c_metric = col("metric"),
                        c_mean = col("mean"), c_se = col("stderr");
      double n = 1.0;
      if (const auto* v = t.find_meta("n")) n = io::parse_double(*v);
      std::vector<plot::Series> series;
      for (const auto& row : t.rows) {
        if (row[c_metric] != plt_metric) continue;
        auto it = std::find_if(series.begin(), series.end(), [&](const auto& s) { return s.label == row[c_est]; });
        if (it == series.end()) {
          series.push_back({row[c_est], {}, {}, {}, row[c_est] == "limit"});
          it = series.end() - 1;
        }
        it->x.push_back(io::parse_double(row[c_ratio]));
        it->y.push_back(io::parse_double(row[c_mean]) / n);
        it->err.push_back(io::parse_double(row[c_se]) / n);
      }
      if (series.empty()) throw InvalidArgument(fmt::format("plot: no rows for metric '{}'", plt_metric));
      plot::Axes axes;
      axes.title = plt_title.empty() ? plt_metric : plt_title;
      axes.x_label = "M/N";
      axes.y_label = "error per component";
      axes.log_y = !plt_linear;
      plot::write_svg(plt_out, axes, series);
      return kOk;
    });
  }
  return kInvalid;
}
