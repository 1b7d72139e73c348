#include <cmath>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <gtest/gtest.h>

#include "mmue/error.hpp"
#include "mmue/estimate.hpp"
#include "mmue/metric.hpp"
#include "mmue/posterior.hpp"
#include "mmue/prior.hpp"
#include "mmue/random.hpp"
#include "oracles.hpp"

using namespace mmue;

TEST(Metric, ParseAndName) {
  for (const char* s : {"squared", "absolute", "power:0.5", "power:1.5", "support", "wsupport:0.3"})
    EXPECT_EQ(ErrorMetric::parse(s).name(), s);
  EXPECT_EQ(ErrorMetric::parse("mse").kind(), ErrorMetric::Kind::Squared);
  EXPECT_EQ(ErrorMetric::parse("mae").kind(), ErrorMetric::Kind::Absolute);
  EXPECT_THROW(ErrorMetric::parse("power:-1"), InvalidArgument);
  EXPECT_THROW(ErrorMetric::parse("wsupport:2"), InvalidArgument);
  EXPECT_ANY_THROW(ErrorMetric::parse("cubic"));
}

TEST(Metric, ZeroOnIdentity) {
  const Eigen::Vector4d x(0.0, -1.2, 3.0, 0.0);
  for (const char* s : {"squared", "absolute", "power:0.5", "power:1.5", "support", "wsupport:0.3"})
    EXPECT_EQ(evaluate_error(ErrorMetric::parse(s), x, x), 0.0) << s;
}

TEST(Metric, SupportExamples) {
  EXPECT_EQ(evaluate_error(ErrorMetric::support(), Eigen::Vector3d(0, 1, 0), Eigen::Vector3d(1, 1, 0)), 1.0);
  EXPECT_DOUBLE_EQ(evaluate_error(ErrorMetric::weighted_support(0.3), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 5)),
                   1.0);
}

TEST(Metric, CustomIsSummedPointwise) {
  const ErrorMetric m = ErrorMetric::custom("cube", [](double a, double b) { return std::pow(std::abs(a - b), 3); });
  EXPECT_DOUBLE_EQ(evaluate_error(m, Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 0)), 9.0);
}

TEST(Posterior, PointMassPrior) {
  EXPECT_EQ(posterior(SignalPrior::gaussian(0.0, 1.0), 0.7, 0.1).zero_mass(), 1.0);
  EXPECT_EQ(posterior(SignalPrior::gaussian(1.0, 1.0), 0.7, 0.1).zero_mass(), 0.0);
}

TEST(Posterior, ZeroMassAtOrigin) {
  const double p = 0.03, var = 1.0, mu = 0.01;
  const double r = (1 - p) / p * std::sqrt(var / mu + 1);
  EXPECT_NEAR(posterior(SignalPrior::gaussian(p, var), 0.0, mu).zero_mass(), r / (1 + r), 1e-14);
}

TEST(Posterior, MixedCdfShape) {
  for (const SignalPrior& prior : {SignalPrior::gaussian(0.3, 1.0), SignalPrior::weibull(0.3, 1.0, 0.5)}) {
    const MixedPosterior post = posterior(prior, 0.4, 0.05);
    EXPECT_NEAR(post.cdf(0.0) - post.cdf_left(0.0), post.zero_mass(), 1e-12);
    EXPECT_NEAR(post.cdf(post.upper() + 1.0), 1.0, 1e-10);
    double prev = 0.0;
    for (double x = post.lower() - 0.1; x < post.upper() + 0.1; x += 0.01) {
      const double f = post.cdf(x);
      ASSERT_GE(f, prev - 1e-15);
      prev = f;
    }
  }
}

TEST(Posterior, SlabMassNormalized) {
  const MixedPosterior post = posterior(SignalPrior::weibull(0.1, 1.0, 0.5), 0.8, 0.02);
  const DensityTable t = post.slab()->tabulate();
  double acc = 0.0;
  for (std::size_t i = 0; i < t.grid.size(); ++i) acc += t.density[i] * t.weight[i];
  EXPECT_NEAR(post.zero_mass() + post.slab_mass() * acc, 1.0, 1e-10);
}

TEST(Estimator, MedianAgainstMonteCarlo) {
  // Sample X | q directly: pick the atom with probability π₀, else draw from the
  // Gaussian slab posterior, and compare the sample median.
  Rng rng(12);
  boost::random::normal_distribution<double> z;
  const double p = 0.3, var = 1.0;
  for (double mu : {0.01, 0.2})
    for (double q : {-0.8, 0.15, 0.6, 2.0}) {
      const double pi0 = posterior(SignalPrior::gaussian(p, var), q, mu).zero_mass();
      const double m = q * var / (var + mu), sd = std::sqrt(var * mu / (var + mu));
      const int n = 2000001;
      std::vector<double> s(n);
      boost::random::uniform_01<double> u;
      for (auto& v : s) v = u(rng) < pi0 ? 0.0 : m + sd * z(rng);
      std::nth_element(s.begin(), s.begin() + n / 2, s.end());
      const double mc = s[n / 2];
      const double est = estimate_mmae(SignalPrior::gaussian(p, var), Eigen::VectorXd::Constant(1, q), mu)(0);
      if (mc == 0.0) {
        EXPECT_EQ(est, 0.0);
        continue;
      }
      // Standard error of a sample median: 1 / (2 f(median) sqrt(n)); 4 SE
      // over eight cases.
      const double f = (1 - pi0) * oracle::normal_pdf(est - m, sd * sd);
      EXPECT_NEAR(est, mc, 4.0 / (2.0 * f * std::sqrt(n))) << mu << " " << q;
    }
}

TEST(Estimator, MedianZeroWhenAtomStraddlesHalf) {
  const SignalPrior prior = SignalPrior::gaussian(0.03, 1.0);
  const MixedPosterior post = posterior(prior, 0.05, 0.01);
  ASSERT_GE(post.zero_mass(), 0.5);
  EXPECT_EQ(estimate_mmae(prior, Eigen::VectorXd::Constant(1, 0.05), 0.01)(0), 0.0);
}

TEST(Estimator, GenericMatchesClosedForms) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> up(0.02, 0.9), uq(-3.0, 3.0), ulogmu(-4.0, 0.0);
  for (int i = 0; i < 60; ++i) {
    const SignalPrior prior = i % 2 ? SignalPrior::gaussian(up(gen), 1.0) : SignalPrior::weibull(up(gen), 1.0, 0.5);
    const double mu = std::pow(10.0, ulogmu(gen));
    const Eigen::VectorXd q = Eigen::VectorXd::Constant(1, uq(gen));
    EXPECT_NEAR(estimate_generic(ErrorMetric::squared(), prior, q, mu)(0), estimate_mean(prior, q, mu)(0), 1e-6);
    EXPECT_NEAR(estimate_generic(ErrorMetric::absolute(), prior, q, mu)(0), estimate_mmae(prior, q, mu)(0), 1e-6);
  }
}

TEST(Estimator, GenericTiesPreferZero) {
  // Support metric on a posterior with π₀ = 1/2 exactly is a tie.
  const MixedPosterior post(0.5, SlabPosterior::gaussian(1.0, 0.1));
  EXPECT_EQ(bayes_estimate(ErrorMetric::support(), post), 0.0);
}

TEST(Support, ThresholdDegenerateCase) {
  // σ²/μ = 3, p = 2/3: the log argument is one.
  EXPECT_NEAR(support_threshold(2.0 / 3.0, 3.0, 1.0), 0.0, 1e-15);
  EXPECT_EQ(estimate_support(SignalPrior::gaussian(0.03, 1.0), Eigen::VectorXd::Zero(3), 0.01), Eigen::VectorXd::Zero(3));
}

TEST(Support, ThresholdMatchesBisection) {
  const double t = support_threshold(0.03, 1.0, 0.01);
  EXPECT_NEAR(std::sqrt(t), oracle::support_boundary_bisect(0.03, 1.0, 0.01, 0.5), 1e-9);
  const double tw = weighted_support_threshold(0.03, 1.0, 0.01, 0.3);
  EXPECT_NEAR(std::sqrt(tw), oracle::support_boundary_bisect(0.03, 1.0, 0.01, 0.3), 1e-9);
  EXPECT_NEAR(weighted_support_threshold(0.03, 1.0, 0.01, 0.5), t, 1e-12 * t);
}

TEST(Support, DecisionsMatchPosteriorArgmax) {
  const double p = 0.1, var = 1.0, mu = 0.02;
  const SignalPrior prior = SignalPrior::gaussian(p, var);
  Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(4001, -1.0, 1.0);
  const Eigen::VectorXd b = estimate_support(prior, q, mu);
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const double one = support_probability(p, var, q(j), mu);
    ASSERT_EQ(b(j), one > 1.0 - one ? 1.0 : 0.0) << q(j);
  }
  EXPECT_EQ(estimate_wsupport(prior, q, mu, 0.5), b);
}

TEST(Support, WeightedEndpointsAndMonotonicity) {
  const SignalPrior prior = SignalPrior::gaussian(0.03, 1.0);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(301, -1.5, 1.5);
  EXPECT_TRUE(estimate_wsupport(prior, q, 0.01, 0.0).isOnes(0.0));
  EXPECT_TRUE(estimate_wsupport(prior, q, 0.01, 1.0).isZero(0.0));
  Eigen::VectorXd prev = Eigen::VectorXd::Ones(q.size());
  for (int i = 0; i <= 20; ++i) {
    const Eigen::VectorXd cur = estimate_wsupport(prior, q, 0.01, i / 20.0);
    EXPECT_TRUE(((cur.array() <= prev.array())).all()) << i;
    prev = cur;
  }
}

TEST(Support, GenericPathAgreesForGaussianSlab) {
  const SignalPrior prior = SignalPrior::gaussian(0.1, 1.0);
  const Eigen::VectorXd q = Eigen::VectorXd::LinSpaced(41, -1.0, 1.0);
  for (double beta : {0.2, 0.5, 0.8}) {
    const ErrorMetric m = beta == 0.5 ? ErrorMetric::support() : ErrorMetric::weighted_support(beta);
    EXPECT_EQ(estimate_generic(m, prior, q, 0.02), estimate(m, prior, q, 0.02)) << beta;
  }
}

TEST(Estimator, ScalarChannelOptimality) {
  // Each metric-optimal estimator beats a fixed family of competitors on its own metric.
  const SignalPrior prior = SignalPrior::gaussian(0.1, 1.0);
  const double mu = 0.05;
  const Eigen::Index n = 100000;
  const Eigen::VectorXd x = sample_signal(prior, n, 31);
  Eigen::VectorXd q(n);
  Rng rng(32);
  boost::random::normal_distribution<double> z(0.0, std::sqrt(mu));
  for (Eigen::Index j = 0; j < n; ++j) q(j) = x(j) + z(rng);
  const Eigen::VectorXd mean = estimate_mean(prior, q, mu);
  const Eigen::VectorXd hard = (q.array().abs() > 1.0).select(q, 0.0);
  // Least squares on a detected support (an oracle support would use x itself).
  const Eigen::VectorXd detected_ls = (estimate_support(prior, q, mu).array() != 0.0).select(q, 0.0);
  for (const char* s : {"absolute", "power:0.5", "power:1.5", "support", "wsupport:0.3"}) {
    const ErrorMetric m = ErrorMetric::parse(s);
    const Eigen::VectorXd opt = estimate(m, prior, q, mu);
    Eigen::ArrayXd d(n);
    for (Eigen::Index j = 0; j < n; ++j) d(j) = m(opt(j), x(j));
    const double own = d.mean();
    for (const Eigen::VectorXd* other : {&mean, &hard, &detected_ls}) {
      Eigen::ArrayXd diff(n);
      for (Eigen::Index j = 0; j < n; ++j) diff(j) = m((*other)(j), x(j)) - d(j);
      const double se = std::sqrt((diff - diff.mean()).square().sum() / (n - 1.0) / n);
      EXPECT_GE(diff.mean(), -2.0 * se) << s << " own=" << own;
    }
  }
}
