#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmue/instance.hpp"

namespace mmue {

/// How the column-mean component of Φ is handled. Matrices with a large
/// common row mean (e.g. {0,1} Bernoulli entries) make plain GAMP diverge;
/// with removal the iteration runs on Φ - c1ᵀ and carries 1ᵀx/√N as an extra
/// unknown tied to x by a noiseless constraint.
enum class MeanRemoval { Auto, On, Off };

struct GampConfig {
  int max_iterations = 20;
  double damping = 1.0;  // 1 = none
  double variance_floor = 1e-12;
  double stop_tolerance = 1e-8;  // relative change in mu
  MeanRemoval mean_removal = MeanRemoval::Auto;
  bool retry_damped = true;  // rerun with damping 0.5 after a divergence
};

void validate(const GampConfig& config);

struct ScalarChannelResult {
  Eigen::VectorXd q;       // effective scalar-channel observations
  double mu = 0.0;         // shared scalar-channel noise variance
  Eigen::VectorXd x_mmse;  // E[x_j | q_j]
  Eigen::VectorXd x_var;   // Var[x_j | q_j]
  int iterations_run = 0;
  std::vector<double> mu_trajectory;
  int floor_hits = 0;
  bool damped_retry = false;
  bool mean_removed = false;
};

/// Scalar-variance sum-product GAMP. Throws GampDivergence (with the mu
/// trajectory) when mu grows more than tenfold over five iterations or the
/// state turns non-finite, after one retry with damping 0.5.
ScalarChannelResult run_gamp(const ProblemInstance& instance, const GampConfig& config = {});

/// Whether MeanRemoval::Auto switches removal on for this matrix.
bool wants_mean_removal(const Eigen::MatrixXd& phi);

}  // namespace mmue
