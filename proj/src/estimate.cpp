#include "mmue/estimate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mmue/denoise.hpp"
#include "mmue/error.hpp"

namespace mmue {
namespace {

constexpr std::size_t kSpanCandidates = 254;
constexpr std::size_t kSlabCandidates = 255;
constexpr std::size_t kCandidates = kSpanCandidates + kSlabCandidates + 3;
constexpr double kGoldenWidth = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr int kRefinements = 2;
constexpr std::size_t kLocalPoints = 16;

void check_prob_params(double p, double slab_variance, double mu) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument(fmt::format("support threshold needs 0 < p < 1, got {}", p));
  if (!(slab_variance > 0.0) || !std::isfinite(slab_variance))
    throw InvalidArgument("support threshold needs a positive slab variance");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("support threshold needs mu > 0");
}

double checked(double v) {
  if (!(v >= 0.0) || !std::isfinite(v))
    throw InvalidArgument(fmt::format("metric returned an invalid distance {}", v));
  return v;
}

// Distance functors specialised on the residual x̂ - x.
struct SquaredD {
  double operator()(double a, double b) const { return (a - b) * (a - b); }
};
struct AbsD {
  double operator()(double a, double b) const { return std::abs(a - b); }
};
struct SqrtD {
  double operator()(double a, double b) const { return std::sqrt(std::abs(a - b)); }
};
struct ThreeHalvesD {
  double operator()(double a, double b) const {
    const double t = std::abs(a - b);
    return t * std::sqrt(t);
  }
};
struct PowD {
  double e;
  double operator()(double a, double b) const { return std::pow(std::abs(a - b), e); }
};
struct CheckedD {
  const ErrorMetric* m;
  double operator()(double a, double b) const { return checked((*m)(a, b)); }
};

template <class D>
class Minimizer {
 public:
  Minimizer(const D& d, const MixedPosterior& post) : d_(d), post_(post) {}

  BayesDecision run() const {
    const SlabPosterior* slab = post_.slab();
    if (!slab || post_.zero_mass() >= 1.0) return {0.0, d_(0.0, 0.0)};
    const double lo = std::min(post_.lower(), 0.0);
    const double hi = std::max(post_.upper(), 0.0);
    const double span = hi - lo;

    std::array<double, kCandidates> cand;
    std::size_t n = 0;
    for (std::size_t i = 0; i < kSpanCandidates; ++i)
      cand[n++] = lo + span * static_cast<double>(i) / static_cast<double>(kSpanCandidates - 1);
    const double slo = slab->lower();
    const double shi = slab->upper();
    for (std::size_t i = 0; i < kSlabCandidates; ++i)
      cand[n++] = slo + (shi - slo) * static_cast<double>(i) / static_cast<double>(kSlabCandidates - 1);
    cand[n++] = 0.0;
    cand[n++] = post_.mean();
    cand[n++] = post_.median();
    std::sort(cand.begin(), cand.end());

    const CoarseTable table = slab->coarse_table();
    const double pi0 = post_.zero_mass();
    const double sm = post_.slab_mass();
    std::array<double, kCandidates> val;
    for (std::size_t i = 0; i < kCandidates; ++i) {
      double acc = 0.0;
      for (std::size_t k = 0; k < CoarseTable::kSize; ++k) acc += table.mass[k] * d_(cand[i], table.x[k]);
      val[i] = pi0 * d_(cand[i], 0.0) + sm * acc;
      if (!std::isfinite(val[i]))
        throw InvalidArgument(fmt::format("metric expectation is not finite at {}", cand[i]));
    }

    // Local minima of the scan, best first.
    std::array<std::size_t, kCandidates> order;
    std::size_t nmin = 0;
    for (std::size_t i = 0; i < kCandidates; ++i) {
      const bool left = i == 0 || val[i] <= val[i - 1];
      const bool right = i + 1 == kCandidates || val[i] <= val[i + 1];
      if (left && right) order[nmin++] = i;
    }
    std::sort(order.begin(), order.begin() + nmin,
              [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });

    double best_x = 0.0;
    double best_v = accurate(0.0);
    // The 64-node scan places a minimum to within a fraction of a coarse
    // panel; an accurate local scan picks the bracket handed to golden section.
    const double reach = (shi - slo) / 16.0;
    const double width = kGoldenWidth * span;
    for (std::size_t r = 0; r < std::min<std::size_t>(nmin, kRefinements); ++r) {
      const double c0 = cand[order[r]];
      const double a = std::max(lo, c0 - reach);
      const double b = std::min(hi, c0 + reach);
      std::array<double, kLocalPoints + 1> xs;
      std::size_t k_best = 0;
      double x = a, v = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k <= kLocalPoints; ++k) {
        xs[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(kLocalPoints);
        const double vk = accurate(xs[k]);
        if (vk < v) {
          v = vk;
          x = xs[k];
          k_best = k;
        }
      }
      golden(xs[k_best == 0 ? 0 : k_best - 1], xs[std::min(k_best + 1, kLocalPoints)], width, x, v);
      consider(x, v, best_x, best_v);
    }
    return {best_x, best_v};
  }

 private:
  double accurate(double xh) const {
    const double v = post_.expect_split([&](double x) { return d_(xh, x); }, xh);
    if (!std::isfinite(v) || v < 0.0)
      throw InvalidArgument(fmt::format("metric expectation is invalid ({}) at {}", v, xh));
    return v;
  }

  static void consider(double x, double v, double& best_x, double& best_v) {
    const double tol = kTieTol * std::max(std::abs(v), std::abs(best_v));
    if (v < best_v - tol || (std::abs(v - best_v) <= tol && std::abs(x) < std::abs(best_x))) {
      best_x = x;
      best_v = v;
    }
  }

  // Golden-section search on [a, b]; (x, v) holds the best point seen so far.
  void golden(double a, double b, double width, double& x, double& v) const {
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double e = a + g * (b - a);
    double fc = accurate(c);
    double fe = accurate(e);
    while (b - a > width) {
      if (fc <= fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = accurate(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = accurate(e);
      }
    }
    consider(c, fc, x, v);
    consider(e, fe, x, v);
  }

  D d_;
  const MixedPosterior& post_;
};

template <class D>
BayesDecision minimize(const D& d, const MixedPosterior& post) {
  return Minimizer<D>(d, post).run();
}

BayesDecision support_decision(double fp_cost, double fn_cost, const MixedPosterior& post) {
  // E[d(0, X)] = fn_cost Pr(X != 0), E[d(1, X)] = fp_cost Pr(X = 0); ties go to 0.
  const double pi0 = post.zero_mass();
  const double r0 = fn_cost * (1.0 - pi0);
  const double r1 = fp_cost * pi0;
  return r1 < r0 ? BayesDecision{1.0, r1} : BayesDecision{0.0, r0};
}

const GaussianSlab* gaussian_slab(const SignalPrior& prior) {
  return std::get_if<GaussianSlab>(&prior.slab);
}

template <class F>
Eigen::VectorXd map_components(const Eigen::VectorXd& q, F&& f) {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) out(j) = f(q(j));
  return out;
}

}  // namespace

double support_threshold(double p, double slab_variance, double mu) {
  return weighted_support_threshold(p, slab_variance, mu, 0.5);
}

double weighted_support_threshold(double p, double slab_variance, double mu, double beta) {
  check_prob_params(p, slab_variance, mu);
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument(fmt::format("beta must lie in [0,1], got {}", beta));
  if (beta == 0.0) return -std::numeric_limits<double>::infinity();
  if (beta == 1.0) return std::numeric_limits<double>::infinity();
  const double snr = slab_variance / mu;
  const double log_arg = std::log(beta / (1.0 - beta)) + std::log((1.0 - p) / p) + 0.5 * std::log1p(snr);
  return 2.0 * ((slab_variance + mu) / snr) * log_arg;
}

BayesDecision bayes_decision(const ErrorMetric& metric, const MixedPosterior& post) {
  switch (metric.kind()) {
    case ErrorMetric::Kind::Support: return support_decision(1.0, 1.0, post);
    case ErrorMetric::Kind::WeightedSupport:
      return support_decision(metric.beta(), 1.0 - metric.beta(), post);
    case ErrorMetric::Kind::Squared: return minimize(SquaredD{}, post);
    case ErrorMetric::Kind::Absolute: return minimize(AbsD{}, post);
    case ErrorMetric::Kind::Power: {
      const double e = metric.exponent();
      if (e == 2.0) return minimize(SquaredD{}, post);
      if (e == 1.0) return minimize(AbsD{}, post);
      if (e == 0.5) return minimize(SqrtD{}, post);
      if (e == 1.5) return minimize(ThreeHalvesD{}, post);
      return minimize(PowD{e}, post);
    }
    case ErrorMetric::Kind::Custom: return minimize(CheckedD{&metric}, post);
  }
  return {};
}

double bayes_estimate(const ErrorMetric& metric, const MixedPosterior& post) {
  return bayes_decision(metric, post).estimate;
}

Eigen::VectorXd estimate_generic(const ErrorMetric& metric, const SignalPrior& prior,
                                 const Eigen::VectorXd& q, double mu) {
  validate(prior);
  return map_components(q, [&](double qj) { return bayes_estimate(metric, posterior(prior, qj, mu)); });
}

Eigen::VectorXd estimate_mean(const SignalPrior& prior, const Eigen::VectorXd& q, double mu) {
  validate(prior);
  // Same routine as GAMP's final denoising step, so the two agree bit for bit.
  return map_components(q, [&](double qj) { return input_denoiser(prior, qj, mu).mean; });
}

Eigen::VectorXd estimate_mmae(const SignalPrior& prior, const Eigen::VectorXd& q, double mu) {
  validate(prior);
  return map_components(q, [&](double qj) { return posterior(prior, qj, mu).median(); });
}

Eigen::VectorXd estimate_support(const SignalPrior& prior, const Eigen::VectorXd& q, double mu) {
  return estimate_wsupport(prior, q, mu, 0.5);
}

Eigen::VectorXd estimate_wsupport(const SignalPrior& prior, const Eigen::VectorXd& q, double mu,
                                  double beta) {
  validate(prior);
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument(fmt::format("beta must lie in [0,1], got {}", beta));
  const GaussianSlab* g = gaussian_slab(prior);
  const double p = prior.sparsity;
  if (g && p > 0.0 && p < 1.0) {
    const double t = weighted_support_threshold(p, g->variance, mu, beta);
    return map_components(q, [&](double qj) { return declare_nonzero(qj, t) ? 1.0 : 0.0; });
  }
  return estimate_generic(ErrorMetric::weighted_support(beta), prior, q, mu);
}

Eigen::VectorXd estimate(const ErrorMetric& metric, const SignalPrior& prior, const Eigen::VectorXd& q,
                         double mu) {
  switch (metric.kind()) {
    case ErrorMetric::Kind::Squared: return estimate_mean(prior, q, mu);
    case ErrorMetric::Kind::Absolute: return estimate_mmae(prior, q, mu);
    case ErrorMetric::Kind::Support: return estimate_support(prior, q, mu);
    case ErrorMetric::Kind::WeightedSupport: return estimate_wsupport(prior, q, mu, metric.beta());
    default: return estimate_generic(metric, prior, q, mu);
  }
}

Eigen::VectorXd masked_slab_mean(const Eigen::VectorXd& mask, const SignalPrior& prior,
                                 const Eigen::VectorXd& q, double mu) {
  if (mask.size() != q.size()) throw InvalidArgument("masked_slab_mean: length mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (mask(j) == 0.0) continue;
    const MixedPosterior post = posterior(prior, q(j), mu);
    if (const SlabPosterior* s = post.slab()) out(j) = s->mean();
  }
  return out;
}

}  // namespace mmue
