#include "mmue/prior.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/weibull_distribution.hpp>
#include <fmt/format.h>

#include "mmue/detail/overloaded.hpp"
#include "mmue/error.hpp"

namespace mmue {
namespace {

using detail::overloaded;

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void validate(const SignalPrior& prior) {
  if (!std::isfinite(prior.sparsity) || prior.sparsity < 0.0 || prior.sparsity > 1.0)
    throw InvalidArgument(fmt::format("sparsity must lie in [0,1], got {}", prior.sparsity));
  std::visit(overloaded{[](const GaussianSlab& g) {
                          if (!positive_finite(g.variance))
                            throw InvalidArgument("Gaussian slab variance must be positive");
                        },
                        [](const WeibullSlab& w) {
                          if (!positive_finite(w.scale) || !positive_finite(w.shape))
                            throw InvalidArgument("Weibull scale and shape must be positive");
                        }},
             prior.slab);
}

double slab_mean(const Slab& slab) {
  return std::visit(overloaded{[](const GaussianSlab&) { return 0.0; },
                               [](const WeibullSlab& w) {
                                 return w.scale * boost::math::tgamma(1.0 + 1.0 / w.shape);
                               }},
                    slab);
}

double slab_second_moment(const Slab& slab) {
  return std::visit(overloaded{[](const GaussianSlab& g) { return g.variance; },
                               [](const WeibullSlab& w) {
                                 return w.scale * w.scale *
                                        boost::math::tgamma(1.0 + 2.0 / w.shape);
                               }},
                    slab);
}

double prior_mean(const SignalPrior& prior) { return prior.sparsity * slab_mean(prior.slab); }

double prior_variance(const SignalPrior& prior) {
  const double m = prior_mean(prior);
  return prior.sparsity * slab_second_moment(prior.slab) - m * m;
}

double slab_log_density(const Slab& slab, double x) {
  return std::visit(
      overloaded{[x](const GaussianSlab& g) {
                   return -0.5 * x * x / g.variance - 0.5 * std::log(2.0 * M_PI * g.variance);
                 },
                 [x](const WeibullSlab& w) {
                   if (x < 0.0) return -std::numeric_limits<double>::infinity();
                   const double z = x / w.scale;
                   return std::log(w.shape / w.scale) + (w.shape - 1.0) * std::log(z) -
                          std::pow(z, w.shape);
                 }},
      slab);
}

std::string describe(const SignalPrior& prior) {
  return std::visit(
      overloaded{[&](const GaussianSlab& g) {
                   return fmt::format("gaussian(p={:.17g},variance={:.17g})", prior.sparsity,
                                      g.variance);
                 },
                 [&](const WeibullSlab& w) {
                   return fmt::format("weibull(p={:.17g},scale={:.17g},shape={:.17g})",
                                      prior.sparsity, w.scale, w.shape);
                 }},
      prior.slab);
}

double sample_component(const SignalPrior& prior, Rng& rng) {
  boost::random::bernoulli_distribution<double> active(prior.sparsity);
  if (!active(rng)) return 0.0;
  return std::visit(overloaded{[&](const GaussianSlab& g) {
                                 boost::random::normal_distribution<double> n(
                                     0.0, std::sqrt(g.variance));
                                 return n(rng);
                               },
                               [&](const WeibullSlab& w) {
                                 boost::random::weibull_distribution<double> d(w.shape, w.scale);
                                 return d(rng);
                               }},
                    prior.slab);
}

Eigen::VectorXd sample_signal(const SignalPrior& prior, Eigen::Index n, Seed seed) {
  validate(prior);
  if (n < 1) throw InvalidArgument("signal length must be positive");
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index j = 0; j < n; ++j) x[j] = sample_component(prior, rng);
  return x;
}

}  // namespace mmue
