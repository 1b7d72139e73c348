#pragma once

#include <Eigen/Dense>

#include "mmue/channel.hpp"
#include "mmue/error.hpp"
#include "mmue/prior.hpp"
#include "mmue/random.hpp"

namespace mmue {

/// One draw of the linear-mixing system y ~ f(y | Φx).
struct ProblemInstance {
  Eigen::VectorXd x;    // ground truth, length N
  Eigen::MatrixXd phi;  // M x N
  Eigen::VectorXd w;    // Φx
  Eigen::VectorXd y;    // channel output
  OutputChannel channel;
  SignalPrior prior;
  Seed seed = 0;

  Eigen::Index n() const { return x.size(); }
  Eigen::Index m() const { return phi.rows(); }
};

/// Bernoulli(1/2) entries in {0,1}, each row scaled to unit Euclidean norm.
/// All-zero rows are redrawn.
Eigen::MatrixXd generate_matrix(Eigen::Index m, Eigen::Index n, Seed seed);

/// w = Φx with every row summed in ascending column order, so the result does
/// not depend on vectorization or blocking.
template <class MatrixDerived, class VectorDerived>
Eigen::Matrix<typename MatrixDerived::Scalar, Eigen::Dynamic, 1> measure(
    const Eigen::MatrixBase<MatrixDerived>& phi, const Eigen::MatrixBase<VectorDerived>& x) {
  using Scalar = typename MatrixDerived::Scalar;
  if (phi.cols() != x.size()) throw InvalidArgument("measure: dimension mismatch");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(phi.rows());
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    Scalar acc(0);
    for (Eigen::Index j = 0; j < phi.cols(); ++j) acc += phi(i, j) * x(j);
    w(i) = acc;
  }
  return w;
}

/// Signal, matrix and channel noise each get their own stream derived from `seed`.
ProblemInstance make_instance(const SignalPrior& prior, const OutputChannel& channel,
                              Eigen::Index m, Eigen::Index n, Seed seed);

}  // namespace mmue
