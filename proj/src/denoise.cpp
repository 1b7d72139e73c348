#include "mmue/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "mmue/error.hpp"
#include "mmue/posterior.hpp"
#include "mmue/quadrature.hpp"

namespace mmue {
namespace {

constexpr double kMomentTol = 1e-11;
constexpr std::size_t kMaxPanels = 4096;
constexpr double kLogDrop = 40.0;  // window edges sit e^{-40} below the peak

struct WindowMoments {
  double mean;
  double variance;
};

// Mean and variance of the density ∝ exp(logf(w)) restricted to [lo, hi],
// by composite 16-point Gauss–Legendre with panel doubling.
template <class LogF>
WindowMoments window_moments(LogF&& logf, double lo, double hi) {
  const auto& rule = quad::unit_gauss_legendre16();
  const double center = 0.5 * (lo + hi);
  std::vector<double> w, lw;
  auto run = [&](std::size_t panels) {
    const double width = (hi - lo) / static_cast<double>(panels);
    w.resize(panels * 16);
    lw.resize(panels * 16);
    double mx = -INFINITY;
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = lo + width * static_cast<double>(p);
      for (std::size_t k = 0; k < 16; ++k) {
        const double x = a + width * rule.nodes[k];
        w[p * 16 + k] = x;
        lw[p * 16 + k] = logf(x) + std::log(rule.weights[k]);
        mx = std::max(mx, lw[p * 16 + k]);
      }
    }
    double z = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double e = std::exp(lw[i] - mx);
      z += e;
      m1 += e * (w[i] - center);
    }
    m1 /= z;
    double m2 = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] - center - m1;
      m2 += std::exp(lw[i] - mx) * d * d;
    }
    return WindowMoments{center + m1, m2 / z};
  };

  std::size_t panels = 4;
  WindowMoments prev = run(panels);
  double err = INFINITY;
  while (panels < kMaxPanels) {
    panels *= 2;
    WindowMoments cur = run(panels);
    const double sd = std::sqrt(cur.variance);
    err = std::max(std::abs(cur.mean - prev.mean) / sd,
                   std::abs(cur.variance - prev.variance) / cur.variance);
    prev = cur;
    if (err <= kMomentTol) return cur;
  }
  throw NumericalError(fmt::format("output quadrature did not converge on [{}, {}]", lo, hi), err);
}

// Largest/smallest w in [a, b] with g(w) >= target, where g is concave with
// its maximum at one end of the interval.
template <class G>
double edge(G&& g, double target, double a, double b) {
  auto f = [&](double w) { return g(w) - target; };
  if (f(b) * f(a) > 0.0) return std::abs(f(a)) < std::abs(f(b)) ? a : b;
  auto tol = [](double lo, double hi) { return hi - lo <= 1e-9 * std::max(1.0, std::abs(hi)); };
  const auto r = boost::math::tools::bisect(f, a, b, tol);
  return 0.5 * (r.first + r.second);
}

}  // namespace

Moments input_denoiser(const SignalPrior& prior, double r, double s) {
  if (!std::isfinite(r) || !std::isfinite(s) || s <= 0.0)
    throw InvalidArgument(fmt::format("input_denoiser: bad arguments r={}, s={}", r, s));
  if (const auto* g = std::get_if<GaussianSlab>(&prior.slab)) {
    const double p = prior.sparsity;
    if (p <= 0.0) return {0.0, 0.0};
    const double total = g->variance + s;
    const double m = r * g->variance / total;
    const double v = g->variance * s / total;
    const double pi1 = p >= 1.0 ? 1.0 : support_probability(p, g->variance, r, s);
    return {pi1 * m, pi1 * v + pi1 * (1.0 - pi1) * m * m};
  }
  const MixedPosterior post = posterior(prior, r, s);
  return {post.mean(), post.variance()};
}

OutputUpdate output_denoiser(const OutputChannel& channel, double p_hat, double tau_p, double y) {
  if (!std::isfinite(p_hat) || !std::isfinite(tau_p) || tau_p <= 0.0 || !std::isfinite(y))
    throw InvalidArgument(
        fmt::format("output_denoiser: bad arguments p_hat={}, tau_p={}, y={}", p_hat, tau_p, y));
  if (const auto* a = std::get_if<AwgnChannel>(&channel)) {
    const double total = a->noise_variance + tau_p;
    return {(y - p_hat) / total, 1.0 / total};
  }
  return output_denoiser_quadrature(channel, p_hat, tau_p, y);
}

OutputUpdate output_denoiser_quadrature(const OutputChannel& channel, double p_hat, double tau_p,
                                        double y) {
  auto logf = [&](double w) {
    const double d = w - p_hat;
    return channel_log_likelihood(channel, y, w) - 0.5 * d * d / tau_p;
  };

  double lo = 0.0, hi = 0.0;
  if (const auto* a = std::get_if<AwgnChannel>(&channel)) {
    const double total = a->noise_variance + tau_p;
    const double m = (p_hat * a->noise_variance + y * tau_p) / total;
    const double sd = std::sqrt(a->noise_variance * tau_p / total);
    lo = m - 12.0 * sd;
    hi = m + 12.0 * sd;
  } else {
    const auto& pc = std::get<PoissonChannel>(channel);
    if (y < 0.0 || y != std::floor(y))
      throw InvalidArgument(fmt::format("Poisson observation must be a nonnegative integer, got {}", y));
    // Stationary point of y log(αw) - αw - (w - p_hat)^2 / (2 tau_p) on w >= 0.
    const double b = p_hat - pc.scale * tau_p;
    double mode;
    if (y == 0.0) {
      mode = std::max(0.0, b);
    } else {
      const double disc = std::sqrt(b * b + 4.0 * y * tau_p);
      mode = b >= 0.0 ? 0.5 * (b + disc) : 2.0 * y * tau_p / (disc - b);
    }
    // The log-density is concave with curvature at most -1/tau_p, so the
    // e^{-40} window lies within sqrt(80 tau_p) of the mode.
    const double reach = std::sqrt(2.0 * kLogDrop * tau_p);
    const double peak = logf(mode);
    const double target = peak - kLogDrop;
    hi = edge(logf, target, mode, mode + reach);
    const double left = std::max(0.0, mode - reach);
    if (mode <= 0.0 || logf(left) >= target)
      lo = left;
    else
      lo = edge(logf, target, left, mode);
    if (!(hi > lo)) hi = lo + reach;
  }

  const WindowMoments mom = window_moments(logf, lo, hi);
  // Log-concave likelihoods never widen the prior; clip rounding below zero.
  return {(mom.mean - p_hat) / tau_p, std::max(0.0, (1.0 - mom.variance / tau_p) / tau_p)};
}

}  // namespace mmue
