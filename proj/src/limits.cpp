#include "mmue/limits.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "mmue/estimate.hpp"
#include "mmue/posterior.hpp"

namespace mmue {
namespace {

constexpr double kOuterTol = 1e-10;
constexpr double kAcceptTol = 1e-7;
// Tightest relative tolerance asked of one panel; quadrature-based slab
// posteriors are only accurate to about this level.
constexpr double kPanelTol = 1e-8;
constexpr unsigned kMaxDepth = 14;
constexpr double kTailProb = 1e-14;

void check_n(std::int64_t n) {
  if (n < 1) throw InvalidArgument("limit: N must be positive");
}

// Breakpoints for the outer integral over q: the spike's width, the slab's
// extent, and the (weighted) support threshold where the inner minimum has a kink.
std::vector<double> breakpoints(const SignalPrior& prior, double mu, double beta) {
  const double sm = std::sqrt(mu);
  std::vector<double> pts = {0.0, -8.0 * sm, 8.0 * sm};
  if (const auto* g = std::get_if<GaussianSlab>(&prior.slab)) {
    const double reach = 8.0 * std::sqrt(g->variance + mu);
    pts.push_back(-reach);
    pts.push_back(reach);
    pts.push_back(-0.5 * reach);
    pts.push_back(0.5 * reach);
    if (prior.sparsity > 0.0 && prior.sparsity < 1.0) {
      const double t = weighted_support_threshold(prior.sparsity, g->variance, mu, beta);
      if (t > 0.0 && std::isfinite(t)) {
        pts.push_back(-std::sqrt(t));
        pts.push_back(std::sqrt(t));
      }
    }
  } else {
    const auto& w = std::get<WeibullSlab>(prior.slab);
    const double top = w.scale * std::pow(-std::log(kTailProb), 1.0 / w.shape) + 10.0 * sm;
    for (double f = 1e-3; f < 1.0; f *= 10.0) pts.push_back(f * top);
    pts.push_back(top);
  }
  const double lo = *std::min_element(pts.begin(), pts.end());
  pts.erase(std::remove_if(pts.begin(), pts.end(), [&](double v) { return v < lo; }), pts.end());
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// Positive q where the posterior median leaves the atom: slab mass above zero
// reaches 1/2. The median-based inner term has a kink there.
double median_kink(const SignalPrior& prior, double mu, double hi) {
  auto excess = [&](double q) {
    const MixedPosterior post = posterior(prior, q, mu);
    return post.slab_mass() * (1.0 - post.slab()->cdf(0.0)) - 0.5;
  };
  if (!(prior.sparsity > 0.0 && prior.sparsity < 1.0)) return NAN;
  double lo = 0.0;
  if (excess(lo) >= 0.0 || excess(hi) <= 0.0) return NAN;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

template <class Inner>
double outer_integral(const SignalPrior& prior, double mu, Inner&& inner, double beta = 0.5,
                      bool median_based = false) {
  validate(prior);
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("limit: mu must be positive");
  auto integrand = [&](double q) {
    const MixedPosterior post = posterior(prior, q, mu);
    const double f = std::exp(post.log_marginal());
    return f == 0.0 ? 0.0 : f * inner(post);
  };
  std::vector<double> pts = breakpoints(prior, mu, beta);
  if (median_based) {
    const double k = median_kink(prior, mu, pts.back());
    if (std::isfinite(k)) {
      pts.push_back(k);
      if (prior.has_gaussian_slab()) pts.push_back(-k);
      std::sort(pts.begin(), pts.end());
    }
  }
  // One unrefined pass sizes each panel; panels already accurate to the
  // absolute target keep that value, the rest are refined to it.
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const std::size_t panels = pts.size() - 1;
  std::vector<double> l1(panels), value(panels), rough_err(panels);
  double rough = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    value[i] = GK::integrate(integrand, pts[i], pts[i + 1], 0, 0.0, &rough_err[i], &l1[i]);
    rough += l1[i];
  }
  const double target = kOuterTol * rough;
  double total = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    double err = rough_err[i];
    if (err > target && l1[i] > 0.0) {
      const double tol = std::min(1e-3, std::max(kPanelTol, target / l1[i]));
      value[i] = GK::integrate(integrand, pts[i], pts[i + 1], kMaxDepth, tol, &err);
    }
    total += value[i];
    err_total += err;
  }
  if (err_total > kAcceptTol * std::abs(total) && err_total > 1e-300)
    throw NumericalError(fmt::format("limit quadrature reached only {:.3g} relative error",
                                     err_total / std::abs(total)),
                         err_total / std::abs(total));
  return total;
}

double std_normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / M_SQRT2); }

}  // namespace

double mmue_scalar(const SignalPrior& prior, double mu, const ErrorMetric& metric) {
  const double beta = metric.kind() == ErrorMetric::Kind::WeightedSupport ? metric.beta() : 0.5;
  return outer_integral(
      prior, mu, [&](const MixedPosterior& post) { return bayes_decision(metric, post).risk; }, beta,
      metric.kind() == ErrorMetric::Kind::Absolute);
}

double mmae_limit(const SignalPrior& prior, double mu, std::int64_t n) {
  check_n(n);
  // Inner term: ∫_{x̂}^∞ x dP - ∫_{-∞}^{x̂} x dP with x̂ the posterior median.
  // The atom at zero contributes nothing to either side.
  auto inner = [](const MixedPosterior& post) {
    const SlabPosterior* s = post.slab();
    if (!s || post.slab_mass() == 0.0) return 0.0;
    const double med = post.median();
    double v;
    if (s->kind() == SlabPosterior::Kind::Gaussian) {
      const double a = s->mean();
      const double sd = std::sqrt(s->variance());
      const double z = (med - a) / sd;
      const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      v = a * (1.0 - 2.0 * std_normal_cdf(z)) + 2.0 * sd * phi;
    } else {
      v = s->expect_split([med](double x) { return x >= med ? x : -x; }, med);
    }
    return post.slab_mass() * v;
  };
  return static_cast<double>(n) * outer_integral(prior, mu, inner, 0.5, true);
}

double mmsue_limit(double p, double slab_variance, double mu, std::int64_t n) {
  check_n(n);
  const double t = support_threshold(p, slab_variance, mu);
  const double dn = static_cast<double>(n);
  if (t <= 0.0) return dn * (1.0 - p);
  return dn * (1.0 - p) * boost::math::erfc(std::sqrt(t / (2.0 * mu))) +
         dn * p * boost::math::erf(std::sqrt(t / (2.0 * (slab_variance + mu))));
}

double mmwse_limit(double p, double slab_variance, double mu, std::int64_t n, double beta) {
  check_n(n);
  const RocPoint r = roc_point(p, slab_variance, mu, beta);
  const double dn = static_cast<double>(n);
  return dn * beta * (1.0 - p) * r.fpr + dn * (1.0 - beta) * p * r.fnr;
}

RocPoint roc_point(double p, double slab_variance, double mu, double beta) {
  const double t = weighted_support_threshold(p, slab_variance, mu, beta);
  if (t <= 0.0) return {1.0, 0.0};
  if (std::isinf(t)) return {0.0, 1.0};
  return {boost::math::erfc(std::sqrt(t / (2.0 * mu))),
          boost::math::erf(std::sqrt(t / (2.0 * (slab_variance + mu))))};
}

}  // namespace mmue
