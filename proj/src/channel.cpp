#include "mmue/channel.hpp"

#include <cmath>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <fmt/format.h>

#include "mmue/detail/overloaded.hpp"
#include "mmue/error.hpp"

namespace mmue {

using detail::overloaded;

void validate(const OutputChannel& channel) {
  std::visit(overloaded{[](const AwgnChannel& c) {
                          if (!std::isfinite(c.noise_variance) || c.noise_variance <= 0.0)
                            throw InvalidArgument("AWGN noise variance must be positive");
                        },
                        [](const PoissonChannel& c) {
                          if (!std::isfinite(c.scale) || c.scale <= 0.0)
                            throw InvalidArgument("Poisson scale must be positive");
                        }},
             channel);
}

std::string describe(const OutputChannel& channel) {
  return std::visit(
      overloaded{
          [](const AwgnChannel& c) { return fmt::format("awgn(noise_variance={:.17g})", c.noise_variance); },
          [](const PoissonChannel& c) { return fmt::format("poisson(scale={:.17g})", c.scale); }},
      channel);
}

bool is_awgn(const OutputChannel& channel) { return std::holds_alternative<AwgnChannel>(channel); }

Eigen::VectorXd channel_sample(const OutputChannel& channel, const Eigen::VectorXd& w, Seed seed) {
  validate(channel);
  Rng rng(seed);
  Eigen::VectorXd y(w.size());
  std::visit(overloaded{[&](const AwgnChannel& c) {
                          boost::random::normal_distribution<double> noise(
                              0.0, std::sqrt(c.noise_variance));
                          for (Eigen::Index i = 0; i < w.size(); ++i) y[i] = w[i] + noise(rng);
                        },
                        [&](const PoissonChannel& c) {
                          for (Eigen::Index i = 0; i < w.size(); ++i) {
                            if (!(w[i] >= 0.0))
                              throw InvalidArgument(fmt::format(
                                  "Poisson channel input must be nonnegative (w[{}] = {})", i, w[i]));
                            const double rate = c.scale * w[i];
                            if (rate == 0.0) {
                              y[i] = 0.0;
                              continue;
                            }
                            boost::random::poisson_distribution<long, double> draw(rate);
                            y[i] = static_cast<double>(draw(rng));
                          }
                        }},
             channel);
  return y;
}

double channel_log_likelihood(const OutputChannel& channel, double y, double w) {
  if (!std::isfinite(y) || !std::isfinite(w)) throw InvalidArgument("non-finite channel arguments");
  return std::visit(
      overloaded{[&](const AwgnChannel& c) {
                   const double d = y - w;
                   return -0.5 * d * d / c.noise_variance -
                          0.5 * std::log(2.0 * M_PI * c.noise_variance);
                 },
                 [&](const PoissonChannel& c) {
                   if (w < 0.0 || y < 0.0 || y != std::floor(y))
                     throw InvalidArgument(
                         fmt::format("Poisson likelihood needs integer y >= 0 and w >= 0 (y={}, w={})", y, w));
                   const double rate = c.scale * w;
                   if (rate == 0.0) return y == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
                   return y * std::log(rate) - rate - std::lgamma(y + 1.0);
                 }},
      channel);
}

}  // namespace mmue
