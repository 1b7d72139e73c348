#include "mmue/instance.hpp"

#include <cmath>

#include <boost/random/bernoulli_distribution.hpp>

namespace mmue {

Eigen::MatrixXd generate_matrix(Eigen::Index m, Eigen::Index n, Seed seed) {
  if (m < 1 || n < 1) throw InvalidArgument("matrix dimensions must be positive");
  Rng rng(seed);
  boost::random::bernoulli_distribution<double> coin(0.5);
  Eigen::MatrixXd phi(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index ones = 0;
    do {
      ones = 0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const bool bit = coin(rng);
        phi(i, j) = bit ? 1.0 : 0.0;
        ones += bit;
      }
    } while (ones == 0);
    phi.row(i) /= std::sqrt(static_cast<double>(ones));
  }
  return phi;
}

ProblemInstance make_instance(const SignalPrior& prior, const OutputChannel& channel,
                              Eigen::Index m, Eigen::Index n, Seed seed) {
  validate(prior);
  validate(channel);
  ProblemInstance inst;
  inst.prior = prior;
  inst.channel = channel;
  inst.seed = seed;
  inst.x = sample_signal(prior, n, derive_seed(seed, 1));
  inst.phi = generate_matrix(m, n, derive_seed(seed, 2));
  inst.w = measure(inst.phi, inst.x);
  inst.y = channel_sample(channel, inst.w, derive_seed(seed, 3));
  return inst;
}

}  // namespace mmue
