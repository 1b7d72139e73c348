#pragma once

#include "mmue/channel.hpp"
#include "mmue/prior.hpp"

namespace mmue {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// E[X | R = r] and Var[X | R = r] for R = X + N(0, s), X ~ prior.
/// Closed form for Gaussian slabs, quadrature for Weibull slabs.
Moments input_denoiser(const SignalPrior& prior, double r, double s);

struct OutputUpdate {
  double score = 0.0;      // (E[W | ...] - p_hat) / tau_p
  double curvature = 0.0;  // (1 - Var[W | ...] / tau_p) / tau_p
};

/// GAMP output step for W ~ N(p_hat, tau_p) observed through the channel.
/// Closed form for AWGN, quadrature for Poisson.
OutputUpdate output_denoiser(const OutputChannel& channel, double p_hat, double tau_p, double y);

/// Quadrature path for any channel. Used by output_denoiser for Poisson and
/// exposed so the AWGN closed form can be checked against it.
OutputUpdate output_denoiser_quadrature(const OutputChannel& channel, double p_hat, double tau_p,
                                        double y);

}  // namespace mmue
