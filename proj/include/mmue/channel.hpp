#pragma once

#include <string>
#include <variant>

#include <Eigen/Dense>

#include "mmue/random.hpp"

namespace mmue {

/// y = w + N(0, noise_variance).
struct AwgnChannel {
  double noise_variance = 1.0;
};

/// y ~ Poisson(scale * w); requires w >= 0.
struct PoissonChannel {
  double scale = 1.0;  // α
};

using OutputChannel = std::variant<AwgnChannel, PoissonChannel>;

void validate(const OutputChannel& channel);
std::string describe(const OutputChannel& channel);
bool is_awgn(const OutputChannel& channel);

/// Passes each w_i through the channel independently.
Eigen::VectorXd channel_sample(const OutputChannel& channel, const Eigen::VectorXd& w, Seed seed);

/// log f(y | w). Returns -inf where the likelihood vanishes (Poisson: w = 0, y > 0).
/// Throws InvalidArgument outside the channel's domain.
double channel_log_likelihood(const OutputChannel& channel, double y, double w);

}  // namespace mmue
