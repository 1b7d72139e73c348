#include <gtest/gtest.h>

#include "mmue/cosamp.hpp"
#include "mmue/error.hpp"
#include "mmue/gamp.hpp"
#include "mmue/instance.hpp"

using namespace mmue;

TEST(Cosamp, ExactRecoverySquareSystem) {
  const Eigen::Index n = 64;
  const Eigen::MatrixXd phi = generate_matrix(n, n, 3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  x(3) = 1.5;
  x(17) = -0.7;
  x(40) = 2.2;
  const Eigen::VectorXd y = phi * x;
  const CosampResult r = cosamp(y, phi, {3, 50, 1e-12});
  EXPECT_LT((r.x - x).norm(), 1e-8);
  EXPECT_LT(r.residual_norms.back(), 1e-8);
}

TEST(Cosamp, ZeroInput) {
  const Eigen::MatrixXd phi = generate_matrix(20, 50, 1);
  EXPECT_TRUE(cosamp(Eigen::VectorXd::Zero(20), phi, {5, 50, 1e-6}).x.isZero(0.0));
}

TEST(Cosamp, SupportSizeAndResidualTrace) {
  const ProblemInstance inst = make_instance(SignalPrior::gaussian(0.03, 1.0), AwgnChannel{3e-4}, 300, 1000, 4);
  const CosampResult r = cosamp(inst, {default_sparsity(0.03, 1000), 50, 1e-6});
  EXPECT_LE((r.x.array() != 0.0).count(), 30);
  for (std::size_t i = 1; i < r.residual_norms.size(); ++i)
    EXPECT_LE(r.residual_norms[i], r.residual_norms[i - 1] * (1.0 + 1e-10));
}

TEST(Cosamp, PoissonRejected) {
  const ProblemInstance inst = make_instance(SignalPrior::weibull(0.03, 1.0, 0.5), PoissonChannel{100.0}, 30, 100, 4);
  const CosampResult r = cosamp(inst, {3, 50, 1e-6});
  EXPECT_EQ(r.status, CosampStatus::ChannelUnsupported);
}

TEST(Cosamp, ConfigValidation) {
  EXPECT_THROW(validate(CosampConfig{0, 50, 1e-6}, 10), InvalidArgument);
  EXPECT_THROW(validate(CosampConfig{11, 50, 1e-6}, 10), InvalidArgument);
  EXPECT_EQ(default_sparsity(0.03, 2000), 60);
  EXPECT_EQ(default_sparsity(0.0001, 100), 1);
}

TEST(Cosamp, WorseThanPosteriorMeanAtDeskScale) {
  int wins = 0;
  for (int t = 0; t < 20; ++t) {
    const ProblemInstance inst = make_instance(SignalPrior::gaussian(0.03, 1.0), AwgnChannel{3e-4}, 800, 2000, 900 + t);
    const ScalarChannelResult g = run_gamp(inst);
    const CosampResult c = cosamp(inst, {default_sparsity(0.03, 2000), 50, 1e-6});
    wins += (c.x - inst.x).squaredNorm() > (g.x_mmse - inst.x).squaredNorm();
  }
  EXPECT_GE(wins, 18);
}
