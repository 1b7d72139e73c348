#pragma once

#include <Eigen/Core>

#include "mmue/metric.hpp"
#include "mmue/posterior.hpp"
#include "mmue/prior.hpp"

namespace mmue {

/// Support threshold τ on q² for a Gaussian slab: declare nonzero iff q² > τ.
/// Requires 0 < p < 1.
double support_threshold(double p, double slab_variance, double mu);

/// Weighted threshold τ′: false positives cost beta, false negatives 1 - beta.
/// Returns -inf at beta = 0 and +inf at beta = 1.
double weighted_support_threshold(double p, double slab_variance, double mu, double beta);

/// Decision rule shared by the support estimators: τ′ <= 0 means always nonzero.
inline bool declare_nonzero(double q, double threshold) {
  return threshold <= 0.0 || q * q > threshold;
}

struct BayesDecision {
  double estimate = 0.0;
  double risk = 0.0;  // E[d(estimate, X)] under the posterior
};

/// argmin over x̂ of E[d(x̂, X)] under one scalar posterior: a coarse scan over
/// the support (plus 0, mean and median), then golden-section refinement.
/// Ties go to the smaller |x̂|. Support metrics return 0 or 1 (the indicator
/// decision), since any nonzero value gives the same distortion.
BayesDecision bayes_decision(const ErrorMetric& metric, const MixedPosterior& post);
double bayes_estimate(const ErrorMetric& metric, const MixedPosterior& post);

/// Componentwise metric-optimal estimate through the generic minimizer.
Eigen::VectorXd estimate_generic(const ErrorMetric& metric, const SignalPrior& prior,
                                 const Eigen::VectorXd& q, double mu);

/// Posterior mean (the squared-error optimum).
Eigen::VectorXd estimate_mean(const SignalPrior& prior, const Eigen::VectorXd& q, double mu);

/// Posterior median (the absolute-error optimum).
Eigen::VectorXd estimate_mmae(const SignalPrior& prior, const Eigen::VectorXd& q, double mu);

/// Binary support estimate; closed-form threshold for Gaussian slabs, the
/// generic path otherwise.
Eigen::VectorXd estimate_support(const SignalPrior& prior, const Eigen::VectorXd& q, double mu);
Eigen::VectorXd estimate_wsupport(const SignalPrior& prior, const Eigen::VectorXd& q, double mu,
                                  double beta);

/// Dispatches to the closed-form path when one exists, else estimate_generic.
Eigen::VectorXd estimate(const ErrorMetric& metric, const SignalPrior& prior,
                         const Eigen::VectorXd& q, double mu);

/// mask_j · E[X_j | q_j, X_j != 0]: amplitudes on a detected support.
Eigen::VectorXd masked_slab_mean(const Eigen::VectorXd& mask, const SignalPrior& prior,
                                 const Eigen::VectorXd& q, double mu);

}  // namespace mmue
