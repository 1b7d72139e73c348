#pragma once

#include <string>
#include <variant>

#include <Eigen/Dense>

#include "mmue/random.hpp"

namespace mmue {

/// Zero-mean Gaussian slab N(0, variance).
struct GaussianSlab {
  double variance = 1.0;
};

/// Weibull slab with density (k/λ)(x/λ)^{k-1} exp(-(x/λ)^k) on x >= 0.
struct WeibullSlab {
  double scale = 1.0;  // λ
  double shape = 1.0;  // k
};

using Slab = std::variant<GaussianSlab, WeibullSlab>;

/// I.i.d. spike-and-slab prior: X = 0 with probability 1 - sparsity,
/// otherwise X ~ slab.
struct SignalPrior {
  double sparsity = 0.0;  // p = Pr(X != 0)
  Slab slab = GaussianSlab{};

  static SignalPrior gaussian(double p, double variance) { return {p, GaussianSlab{variance}}; }
  static SignalPrior weibull(double p, double scale, double shape) {
    return {p, WeibullSlab{scale, shape}};
  }

  bool has_gaussian_slab() const { return std::holds_alternative<GaussianSlab>(slab); }
};

/// Throws InvalidArgument unless 0 <= p <= 1 and slab parameters are finite and positive.
void validate(const SignalPrior& prior);

double slab_mean(const Slab& slab);
double slab_second_moment(const Slab& slab);
double prior_mean(const SignalPrior& prior);
double prior_variance(const SignalPrior& prior);

/// log of the slab density at x (-inf outside the support).
double slab_log_density(const Slab& slab, double x);

std::string describe(const SignalPrior& prior);

/// Draws n i.i.d. components from the prior.
Eigen::VectorXd sample_signal(const SignalPrior& prior, Eigen::Index n, Seed seed);

/// Draws one component with a caller-owned engine (used by the scalar-channel simulator).
double sample_component(const SignalPrior& prior, Rng& rng);

}  // namespace mmue
