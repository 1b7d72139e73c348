#pragma once

#include <cstdint>

#include "mmue/metric.hpp"
#include "mmue/prior.hpp"

namespace mmue {

/// Per-component expected distortion of the metric-optimal estimator on the
/// scalar channel q = x + N(0, mu): ∫ f_Q(q) min_x̂ E[d(x̂, X) | q] dq.
/// Throws NumericalError when the outer quadrature misses its tolerance.
double mmue_scalar(const SignalPrior& prior, double mu, const ErrorMetric& metric);

/// Minimum mean absolute error over N components, through the truncated
/// first moments of the posterior on either side of its median.
double mmae_limit(const SignalPrior& prior, double mu, std::int64_t n);

/// Minimum mean support error over N components (Gaussian slab, 0 < p < 1).
double mmsue_limit(double p, double slab_variance, double mu, std::int64_t n);

/// Minimum mean weighted-support error; false positives weigh beta.
double mmwse_limit(double p, double slab_variance, double mu, std::int64_t n, double beta);

struct RocPoint {
  double fpr = 0.0;
  double fnr = 0.0;
  double tpr() const { return 1.0 - fnr; }
};

/// Error rates of the weighted-support decision at weight beta.
RocPoint roc_point(double p, double slab_variance, double mu, double beta);

}  // namespace mmue
