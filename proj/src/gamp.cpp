#include "mmue/gamp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mmue/denoise.hpp"
#include "mmue/error.hpp"

namespace mmue {
namespace {

constexpr int kDivergenceWindow = 5;
constexpr double kDivergenceFactor = 10.0;
constexpr double kAutoMeanEnergy = 2.0;

struct Divergence {
  std::vector<double> trajectory;
};

class Floor {
 public:
  explicit Floor(double floor) : floor_(floor) {}
  double operator()(double v) {
    if (v < floor_) {
      ++hits_;
      return floor_;
    }
    return v;
  }
  int hits() const { return hits_; }

 private:
  double floor_;
  int hits_ = 0;
};

ScalarChannelResult iterate(const ProblemInstance& inst, const GampConfig& cfg, bool remove_mean,
                            double damping) {
  using Eigen::VectorXd;
  const Eigen::Index n = inst.n();
  const Eigen::Index m = inst.m();
  const double dn = static_cast<double>(n);
  const auto& phi = inst.phi;
  Floor floor(cfg.variance_floor);

  // Row means c, centered row energies rn, and the z-column a = c√N.
  VectorXd c = VectorXd::Zero(m);
  VectorXd a = VectorXd::Zero(m);
  VectorXd rn = phi.rowwise().squaredNorm();
  if (remove_mean) {
    c = phi.rowwise().sum() / dn;
    a = c * std::sqrt(dn);
    rn -= dn * c.cwiseProduct(c);
  }
  const VectorXd a2 = a.cwiseProduct(a);
  const double b = 1.0 / std::sqrt(dn);

  // Centered products without forming Φ - c1ᵀ.
  auto forward = [&](const VectorXd& v) -> VectorXd {
    VectorXd out = phi * v;
    if (remove_mean) out -= c * v.sum();
    return out;
  };
  auto adjoint = [&](const VectorXd& s) -> VectorXd {
    VectorXd out = phi.transpose() * s;
    if (remove_mean) out.array() -= c.dot(s);
    return out;
  };

  VectorXd x_hat = VectorXd::Constant(n, prior_mean(inst.prior));
  double tau_x = floor(prior_variance(inst.prior));
  double z_hat = remove_mean ? b * x_hat.sum() : 0.0;
  double tau_z = remove_mean ? tau_x : 0.0;
  VectorXd s_hat = VectorXd::Zero(m);
  double s0 = 0.0;

  VectorXd tau_p(m), p_hat(m), tau_s(m), r_hat(n), s_new(m), x_new(n), x_var(n);
  double mu = 0.0;
  std::vector<double> traj;
  int it = 0;
  for (; it < cfg.max_iterations; ++it) {
    // Output step.
    for (Eigen::Index i = 0; i < m; ++i) tau_p(i) = floor(rn(i) * tau_x + a2(i) * tau_z);
    p_hat = forward(x_hat) + a * z_hat - tau_p.cwiseProduct(s_hat);
    for (Eigen::Index i = 0; i < m; ++i) {
      const OutputUpdate u = output_denoiser(inst.channel, p_hat(i), tau_p(i), inst.y(i));
      s_new(i) = u.score;
      tau_s(i) = u.curvature;
    }
    double s0_new = 0.0, tau_s0 = 0.0;
    if (remove_mean) {
      const double tau_p0 = floor(tau_x + tau_z);
      const double p0 = b * x_hat.sum() - z_hat - tau_p0 * s0;
      s0_new = -p0 / tau_p0;
      tau_s0 = 1.0 / tau_p0;
    }
    s_hat = damping * s_new + (1.0 - damping) * s_hat;
    s0 = damping * s0_new + (1.0 - damping) * s0;

    // Input step.
    const double energy = rn.dot(tau_s) + tau_s0;
    const double tau_r = floor(dn / energy);
    r_hat = x_hat + tau_r * adjoint(s_hat);
    if (remove_mean) r_hat.array() += tau_r * b * s0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const Moments mo = input_denoiser(inst.prior, r_hat(j), tau_r);
      x_new(j) = mo.mean;
      x_var(j) = mo.variance;
    }
    if (remove_mean) {
      const double tau_rz = floor(1.0 / (a2.dot(tau_s) + tau_s0));
      const double r_z = z_hat + tau_rz * (a.dot(s_hat) - s0);
      z_hat = damping * r_z + (1.0 - damping) * z_hat;
      tau_z = tau_rz;
    }
    x_hat = damping * x_new + (1.0 - damping) * x_hat;
    tau_x = floor(x_var.mean());

    const double prev = mu;
    mu = tau_r;
    traj.push_back(mu);
    if (!std::isfinite(mu) || !x_hat.allFinite() || !std::isfinite(z_hat)) throw Divergence{traj};
    const std::size_t t = traj.size();
    if (t > static_cast<std::size_t>(kDivergenceWindow) &&
        traj[t - 1] > kDivergenceFactor * traj[t - 1 - kDivergenceWindow])
      throw Divergence{traj};
    if (it > 0 && std::abs(mu - prev) <= cfg.stop_tolerance * prev) {
      ++it;
      break;
    }
  }

  ScalarChannelResult res;
  res.q = r_hat;
  res.mu = mu;
  res.x_mmse.resize(n);
  res.x_var.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Moments mo = input_denoiser(inst.prior, r_hat(j), mu);
    res.x_mmse(j) = mo.mean;
    res.x_var(j) = mo.variance;
  }
  res.iterations_run = it;
  res.mu_trajectory = std::move(traj);
  res.floor_hits = floor.hits();
  res.mean_removed = remove_mean;
  return res;
}

}  // namespace

void validate(const GampConfig& config) {
  if (config.max_iterations < 1) throw InvalidArgument("gamp: max_iterations must be positive");
  if (!(config.damping > 0.0 && config.damping <= 1.0))
    throw InvalidArgument("gamp: damping must lie in (0, 1]");
  if (!(config.variance_floor > 0.0)) throw InvalidArgument("gamp: variance_floor must be positive");
  if (!(config.stop_tolerance >= 0.0)) throw InvalidArgument("gamp: stop_tolerance must be nonnegative");
}

bool wants_mean_removal(const Eigen::MatrixXd& phi) {
  const Eigen::VectorXd c = phi.rowwise().mean();
  return c.squaredNorm() * static_cast<double>(phi.cols()) >= kAutoMeanEnergy;
}

ScalarChannelResult run_gamp(const ProblemInstance& instance, const GampConfig& config) {
  validate(config);
  validate(instance.prior);
  validate(instance.channel);
  if (instance.phi.cols() != instance.n() || instance.y.size() != instance.m())
    throw InvalidArgument("run_gamp: instance dimensions do not conform");
  const bool remove = config.mean_removal == MeanRemoval::On ||
                      (config.mean_removal == MeanRemoval::Auto && wants_mean_removal(instance.phi));
  try {
    return iterate(instance, config, remove, config.damping);
  } catch (const Divergence& d) {
    if (!config.retry_damped || config.damping <= 0.5)
      throw GampDivergence("GAMP diverged", d.trajectory);
  }
  try {
    ScalarChannelResult res = iterate(instance, config, remove, 0.5);
    res.damped_retry = true;
    return res;
  } catch (const Divergence& d) {
    throw GampDivergence("GAMP diverged, also with damping 0.5", d.trajectory);
  }
}

}  // namespace mmue
