#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mmue/instance.hpp"

namespace mmue {

struct CosampConfig {
  Eigen::Index sparsity_k = 1;
  int max_iterations = 50;
  double halting_tolerance = 1e-6;  // relative residual change
};

void validate(const CosampConfig& config, Eigen::Index n);

/// ceil(p N), at least 1.
Eigen::Index default_sparsity(double p, Eigen::Index n);

enum class CosampStatus { Ok, ChannelUnsupported };

struct CosampResult {
  CosampStatus status = CosampStatus::Ok;
  Eigen::VectorXd x;
  int iterations = 0;
  bool rank_deficient = false;  // some least-squares solve needed the ridge
  std::vector<double> residual_norms;  // ‖y - Φx‖ after each accepted iteration
};

/// Compressive sampling matching pursuit.
CosampResult cosamp(const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, const CosampConfig& config);

/// Runs on AWGN instances; Poisson instances come back ChannelUnsupported
/// with an all-zero estimate.
CosampResult cosamp(const ProblemInstance& instance, const CosampConfig& config);

}  // namespace mmue
