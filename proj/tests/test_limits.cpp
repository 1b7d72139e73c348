#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <gtest/gtest.h>

#include "mmue/estimate.hpp"
#include "mmue/harness.hpp"
#include "mmue/limits.hpp"
#include "mmue/metric.hpp"
#include "oracles.hpp"

using namespace mmue;

TEST(Limits, DenseGaussianClosedForms) {
  for (double var : {0.5, 1.0, 4.0})
    for (double mu : {1e-3, 0.1, 2.0}) {
      const SignalPrior prior = SignalPrior::gaussian(1.0, var);
      const double post_var = var * mu / (var + mu);
      EXPECT_NEAR(mmue_scalar(prior, mu, ErrorMetric::squared()), post_var, 1e-10 * post_var);
      const double mad = std::sqrt(2.0 * post_var / boost::math::constants::pi<double>());
      EXPECT_NEAR(mmue_scalar(prior, mu, ErrorMetric::absolute()), mad, 1e-8 * mad);
      EXPECT_NEAR(mmae_limit(prior, mu, 1), mad, 1e-8 * mad);
    }
}

TEST(Limits, AbsoluteVanishesWithoutNoise) {
  EXPECT_LT(mmae_limit(SignalPrior::gaussian(0.03, 1.0), 1e-10, 10000), 1e-4 * 10000 * 0.03);
}

TEST(Limits, GenericIntegratorMatchesSupportClosedForms) {
  const SignalPrior prior = SignalPrior::gaussian(0.03, 1.0);
  for (double mu : {1e-3, 1e-2, 1e-1}) {
    EXPECT_NEAR(mmue_scalar(prior, mu, ErrorMetric::support()), mmsue_limit(0.03, 1.0, mu, 1), 1e-6);
    EXPECT_NEAR(mmue_scalar(prior, mu, ErrorMetric::weighted_support(0.3)), mmwse_limit(0.03, 1.0, mu, 1, 0.3), 1e-6);
  }
}

TEST(Limits, SupportDegenerateThreshold) {
  EXPECT_NEAR(mmsue_limit(2.0 / 3.0, 3.0, 1.0, 9), 3.0, 1e-12);
  // Near-perfect recovery at negligible noise: the remaining errors are slab
  // draws too small to tell from noise, |x| below about sqrt(τ) = 4.6e-3.
  const double tiny = mmsue_limit(0.03, 1.0, 1e-6, 10000);
  EXPECT_LT(tiny, 0.01 * 0.03 * 10000);
  const auto rows = run_scalar_channel_direct(SignalPrior::gaussian(0.03, 1.0), 1e-6, 1000000,
                                              {ErrorMetric::support()}, 8);
  EXPECT_NEAR(rows[0].empirical * 10000, tiny, 3.0 * rows[0].stderr_ * 10000);
}

TEST(Limits, WeightedHalfIsHalfSupport) {
  for (double p : {0.01, 0.1, 0.5})
    for (double snr : {0.1, 1.0, 100.0}) {
      const double mu = 1.0 / snr;
      EXPECT_NEAR(mmwse_limit(p, 1.0, mu, 100, 0.5), 0.5 * mmsue_limit(p, 1.0, mu, 100), 1e-12);
    }
  EXPECT_EQ(mmwse_limit(0.03, 1.0, 0.01, 100, 0.0), 0.0);
}

TEST(Roc, EndpointsAndDecomposition) {
  const RocPoint a = roc_point(0.03, 1.0, 0.01, 0.0), b = roc_point(0.03, 1.0, 0.01, 1.0);
  EXPECT_EQ(a.fpr, 1.0);
  EXPECT_EQ(a.fnr, 0.0);
  EXPECT_EQ(b.fpr, 0.0);
  EXPECT_EQ(b.fnr, 1.0);
  const RocPoint h = roc_point(0.03, 1.0, 0.01, 0.5);
  EXPECT_NEAR(0.97 * h.fpr + 0.03 * h.fnr, mmsue_limit(0.03, 1.0, 0.01, 1), 1e-14);
  EXPECT_NEAR(h.tpr(), 1.0 - h.fnr, 0.0);
}

TEST(Roc, MonotoneInBeta) {
  double fpr = 1.0, tpr = 1.0;
  for (int i = 0; i <= 24; ++i) {
    const RocPoint r = roc_point(0.03, 1.0, 0.003, i / 24.0);
    EXPECT_LE(r.fpr, fpr);
    EXPECT_LE(r.tpr(), tpr);
    fpr = r.fpr;
    tpr = r.tpr();
  }
}

TEST(Direct, DenseGaussianMse) {
  const auto rows = run_scalar_channel_direct(SignalPrior::gaussian(1.0, 1.0), 0.1, 1000000,
                                              {ErrorMetric::squared()}, 5);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].empirical, 0.1 / 1.1, 3.0 * rows[0].stderr_);
  EXPECT_NEAR(rows[0].limit, 0.1 / 1.1, 1e-10);
}

TEST(Direct, SupportAndWeightedRates) {
  const auto rows = run_scalar_channel_direct(SignalPrior::gaussian(0.03, 1.0), 0.01, 1000000,
                                              {ErrorMetric::support(), ErrorMetric::weighted_support(0.3)}, 6);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) EXPECT_NEAR(r.empirical, r.limit, 3.0 * r.stderr_) << r.metric << " " << r.quantity;
}
