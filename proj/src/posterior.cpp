#include "mmue/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "mmue/detail/overloaded.hpp"
#include "mmue/error.hpp"

namespace mmue {
namespace {

constexpr double kLikelihoodHalfWidth = 10.0;  // in units of sqrt(mu)
constexpr double kPriorWindow = 60.0;          // e^{-60} of Weibull mass beyond
constexpr std::size_t kStartPanels = 8;
constexpr std::size_t kMaxPanels = 4096;
constexpr double kTabulationTol = 1e-11;

double log_normal_pdf(double x, double variance) {
  return -0.5 * x * x / variance - 0.5 * std::log(2.0 * M_PI * variance);
}

double log_sum_exp(const std::vector<double>& v) {
  const double mx = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (double e : v) s += std::exp(e - mx);
  return mx + std::log(s);
}

}  // namespace

namespace detail {

const StandardNormalTable& standard_normal_table() {
  static const StandardNormalTable table = [] {
    StandardNormalTable t{};
    const auto& rule = quad::unit_gauss_legendre16();
    const double width = 2.0 * StandardNormalTable::kHalfWidth / StandardNormalTable::kPanels;
    for (std::size_t p = 0; p < StandardNormalTable::kPanels; ++p) {
      const double a = -StandardNormalTable::kHalfWidth + width * static_cast<double>(p);
      for (std::size_t k = 0; k < 16; ++k) {
        const double z = a + width * rule.nodes[k];
        t.z[p * 16 + k] = z;
        t.mass[p * 16 + k] = width * rule.weights[k] * std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
      }
    }
    return t;
  }();
  return table;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// SlabPosterior

SlabPosterior SlabPosterior::gaussian(double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance <= 0.0)
    throw InvalidArgument("gaussian branch needs finite mean and positive variance");
  SlabPosterior s;
  s.kind_ = Kind::Gaussian;
  s.mean_ = mean;
  s.var_ = variance;
  s.sd_ = std::sqrt(variance);
  s.u_lo_ = -detail::StandardNormalTable::kHalfWidth;
  s.u_hi_ = detail::StandardNormalTable::kHalfWidth;
  s.panels_ = detail::StandardNormalTable::kPanels;
  return s;
}

double SlabPosterior::log_weight(double u) const {
  const double x = x_of_u(u);
  const double d = q_ - x;
  const double jac = grade_ == 1.0 ? 0.0 : std::log(grade_) + (grade_ - 1.0) * std::log(u);
  return -std::pow(u, grade_) - 0.5 * d * d / mu_ - 0.5 * std::log(2.0 * M_PI * mu_) + jac;
}

SlabPosterior SlabPosterior::weibull(const WeibullSlab& slab, double q, double mu) {
  SlabPosterior s;
  s.kind_ = Kind::Weibull;
  s.scale_ = slab.scale;
  s.shape_ = slab.shape;
  s.q_ = q;
  s.mu_ = mu;

  // Grading u = s^g keeps x = λ s^{g/k} at least quadratic near the origin.
  s.grade_ = std::max(1.0, std::ceil(2.0 * slab.shape));

  // Likelihood window: points where N(q - x; 0, mu) is e^{-50} below its
  // maximum over x >= 0.
  const double half = kLikelihoodHalfWidth * std::sqrt(mu);
  const double x_lo = std::max(0.0, q - half);
  const double x_hi = q >= 0.0 ? q + half : half * half / (std::sqrt(q * q + half * half) - q);
  const double ex = slab.shape / s.grade_;
  s.u_lo_ = std::pow(x_lo / slab.scale, ex);
  const double u_cap = std::pow(std::pow(s.u_lo_, s.grade_) + kPriorWindow, 1.0 / s.grade_);
  s.u_hi_ = std::min(std::pow(x_hi / slab.scale, ex), u_cap);

  const auto& rule = quad::unit_gauss_legendre16();
  struct Tab {
    std::vector<double> u, logw;
    double log_norm, mean, var;
  };
  auto tabulate_with = [&](std::size_t panels) {
    Tab t;
    t.u.resize(panels * 16);
    t.logw.resize(panels * 16);
    const double width = (s.u_hi_ - s.u_lo_) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double a = s.u_lo_ + width * static_cast<double>(p);
      for (std::size_t k = 0; k < 16; ++k) {
        const double u = a + width * rule.nodes[k];
        t.u[p * 16 + k] = u;
        t.logw[p * 16 + k] = s.log_weight(u) + std::log(width * rule.weights[k]);
      }
    }
    t.log_norm = log_sum_exp(t.logw);
    double m = 0.0;
    for (std::size_t i = 0; i < t.u.size(); ++i)
      m += std::exp(t.logw[i] - t.log_norm) * s.x_of_u(t.u[i]);
    double v = 0.0;
    for (std::size_t i = 0; i < t.u.size(); ++i) {
      const double d = s.x_of_u(t.u[i]) - m;
      v += std::exp(t.logw[i] - t.log_norm) * d * d;
    }
    t.mean = m;
    t.var = v;
    return t;
  };

  std::size_t panels = kStartPanels;
  Tab coarse = tabulate_with(panels);
  for (;;) {
    Tab fine = tabulate_with(2 * panels);
    const double scale = std::abs(fine.mean) + std::sqrt(fine.var);
    // Far from the origin with tiny mu, x - mean carries rounding of order
    // eps * |mean|; variance changes below that floor are not resolvable.
    const double var_floor =
        1e3 * std::numeric_limits<double>::epsilon() * std::abs(fine.mean) * std::sqrt(fine.var);
    const double err =
        std::max({std::abs(fine.log_norm - coarse.log_norm),
                  std::abs(fine.mean - coarse.mean) / scale,
                  std::max(0.0, std::abs(fine.var - coarse.var) - var_floor) / fine.var});
    panels *= 2;
    coarse = std::move(fine);
    if (err <= kTabulationTol || !std::isfinite(err)) {
      if (!std::isfinite(coarse.log_norm) || !(coarse.var > 0.0))
        throw NumericalError(
            fmt::format("Weibull posterior has no mass in its window (q={}, mu={})", q, mu), err);
      break;
    }
    if (panels >= kMaxPanels)
      throw NumericalError(
          fmt::format("Weibull posterior quadrature did not converge (q={}, mu={})", q, mu), err);
  }

  s.panels_ = panels;
  s.u_ = std::move(coarse.u);
  s.log_norm_ = coarse.log_norm;
  s.mass_.resize(s.u_.size());
  s.cum_.assign(panels + 1, 0.0);
  for (std::size_t i = 0; i < s.u_.size(); ++i) s.mass_[i] = std::exp(coarse.logw[i] - s.log_norm_);
  for (std::size_t p = 0; p < panels; ++p) {
    double acc = 0.0;
    for (std::size_t k = 0; k < 16; ++k) acc += s.mass_[p * 16 + k];
    s.cum_[p + 1] = s.cum_[p] + acc;
  }
  s.mean_ = coarse.mean;
  s.var_ = coarse.var;
  s.sd_ = std::sqrt(coarse.var);
  s.log_evidence_ = s.log_norm_;
  return s;
}

double SlabPosterior::x_of_u(double u) const {
  if (kind_ == Kind::Gaussian) return mean_ + sd_ * u;
  return scale_ * std::pow(u, grade_ / shape_);
}

double SlabPosterior::u_of_x(double x) const {
  if (kind_ == Kind::Gaussian) return (x - mean_) / sd_;
  if (x <= 0.0) return 0.0;
  return std::pow(x / scale_, shape_ / grade_);
}

double SlabPosterior::density_u(double u) const {
  if (kind_ == Kind::Gaussian) return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
  return std::exp(log_weight(u) - log_norm_);
}

const double* SlabPosterior::node_u() const {
  return kind_ == Kind::Gaussian ? detail::standard_normal_table().z.data() : u_.data();
}

const double* SlabPosterior::node_mass() const {
  return kind_ == Kind::Gaussian ? detail::standard_normal_table().mass.data() : mass_.data();
}

double SlabPosterior::density(double x) const {
  if (kind_ == Kind::Gaussian) {
    const double z = (x - mean_) / sd_;
    return std::exp(-0.5 * z * z) / (sd_ * std::sqrt(2.0 * M_PI));
  }
  if (x <= 0.0) return 0.0;
  const double u = u_of_x(x);
  const double ex = shape_ / grade_;
  const double du_dx = ex / scale_ * std::pow(x / scale_, ex - 1.0);
  return std::exp(log_weight(u) - log_norm_) * du_dx;
}

double SlabPosterior::cdf(double x) const {
  if (kind_ == Kind::Gaussian) return 0.5 * boost::math::erfc(-(x - mean_) / (sd_ * M_SQRT2));
  const double u = u_of_x(x);
  if (u <= u_lo_) return 0.0;
  if (u >= u_hi_) return 1.0;
  const double width = panel_width();
  std::size_t p = static_cast<std::size_t>((u - u_lo_) / width);
  if (p >= panels_) p = panels_ - 1;
  const double a = u_lo_ + width * static_cast<double>(p);
  const double partial = quad::integrate_gl16([this](double uu) { return density_u(uu); }, a, u);
  return std::clamp(cum_[p] + partial, 0.0, 1.0);
}

double SlabPosterior::quantile(double prob) const {
  if (!(prob > 0.0 && prob < 1.0)) throw InvalidArgument("quantile probability must lie in (0,1)");
  if (kind_ == Kind::Gaussian)
    return mean_ - sd_ * M_SQRT2 * boost::math::erfc_inv(2.0 * prob);

  // Locate the panel, then bisect on the in-panel CDF.
  const auto it = std::upper_bound(cum_.begin(), cum_.end(), prob);
  std::size_t p = it == cum_.begin() ? 0 : static_cast<std::size_t>(it - cum_.begin()) - 1;
  if (p >= panels_) p = panels_ - 1;
  const double width = panel_width();
  double a = u_lo_ + width * static_cast<double>(p);
  double b = p + 1 == panels_ ? u_hi_ : a + width;
  auto excess = [&](double u) {
    return cum_[p] +
           quad::integrate_gl16([this](double uu) { return density_u(uu); },
                                u_lo_ + width * static_cast<double>(p), u) -
           prob;
  };
  const double span_tol = 1e-12 * (u_hi_ - u_lo_);
  auto tol = [span_tol](double lo, double hi) { return hi - lo <= span_tol; };
  const double fa = excess(a);
  const double fb = excess(b);
  if (fa >= 0.0) return x_of_u(a);
  if (fb <= 0.0) return x_of_u(b);
  const auto root = boost::math::tools::bisect(excess, a, b, tol);
  return x_of_u(0.5 * (root.first + root.second));
}

CoarseTable SlabPosterior::coarse_table() const {
  CoarseTable t{};
  const auto& rule = quad::unit_gauss_legendre8();
  const double width = (u_hi_ - u_lo_) / 8.0;
  double total = 0.0;
  for (std::size_t p = 0; p < 8; ++p) {
    const double a = u_lo_ + width * static_cast<double>(p);
    for (std::size_t k = 0; k < 8; ++k) {
      const double u = a + width * rule.nodes[k];
      t.x[p * 8 + k] = x_of_u(u);
      t.mass[p * 8 + k] = width * rule.weights[k] * density_u(u);
      total += t.mass[p * 8 + k];
    }
  }
  for (double& m : t.mass) m /= total;
  return t;
}

DensityTable SlabPosterior::tabulate() const {
  DensityTable t;
  const std::size_t n = node_count();
  const double* u = node_u();
  const double* m = node_mass();
  t.grid.resize(n);
  t.density.resize(n);
  t.weight.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_of_u(u[i]);
    const double dx_du =
        kind_ == Kind::Gaussian ? sd_ : scale_ * grade_ / shape_ * std::pow(u[i], grade_ / shape_ - 1.0);
    t.grid[i] = x;
    t.density[i] = density_u(u[i]) / dx_du;
    t.weight[i] = m[i] / t.density[i];
  }
  return t;
}

// ----------------------------------------------------------------------------
// MixedPosterior

double MixedPosterior::mean() const { return slab_ ? slab_mass() * slab_->mean() : 0.0; }

double MixedPosterior::variance() const {
  if (!slab_) return 0.0;
  const double sm = slab_mass();
  const double m = slab_->mean();
  // Law of total variance over the atom/slab indicator.
  return sm * slab_->variance() + sm * (1.0 - sm) * m * m;
}

double MixedPosterior::cdf(double x) const {
  const double cont = slab_ ? slab_mass() * slab_->cdf(x) : 0.0;
  return std::min(1.0, cont + (x >= 0.0 ? zero_mass_ : 0.0));
}

double MixedPosterior::cdf_left(double x) const {
  const double cont = slab_ ? slab_mass() * slab_->cdf(x) : 0.0;
  return std::min(1.0, cont + (x > 0.0 ? zero_mass_ : 0.0));
}

double MixedPosterior::median() const {
  if (!slab_ || zero_mass_ >= 1.0) return 0.0;
  const double sm = slab_mass();
  const double below_zero = sm * slab_->cdf(0.0);
  if (below_zero >= 0.5) return slab_->quantile(std::min(0.5 / sm, std::nextafter(1.0, 0.0)));
  if (below_zero + zero_mass_ >= 0.5) return 0.0;
  return slab_->quantile(std::clamp((0.5 - zero_mass_) / sm, std::numeric_limits<double>::min(),
                                    std::nextafter(1.0, 0.0)));
}

double MixedPosterior::lower() const { return slab_ ? std::min(0.0, slab_->lower()) : 0.0; }
double MixedPosterior::upper() const { return slab_ ? std::max(0.0, slab_->upper()) : 0.0; }

// ----------------------------------------------------------------------------

MixedPosterior posterior(const SignalPrior& prior, double q, double mu) {
  if (!std::isfinite(q)) throw InvalidArgument("posterior: q must be finite");
  if (!std::isfinite(mu) || mu <= 0.0) throw InvalidArgument("posterior: mu must be positive");
  const double p = prior.sparsity;
  if (p <= 0.0) return MixedPosterior(1.0, std::nullopt, log_normal_pdf(q, mu));

  SlabPosterior branch = std::visit(
      detail::overloaded{[&](const GaussianSlab& g) {
                           const double total = g.variance + mu;
                           SlabPosterior b =
                               SlabPosterior::gaussian(q * g.variance / total, g.variance * mu / total);
                           b.set_log_evidence(log_normal_pdf(q, total));
                           return b;
                         },
                         [&](const WeibullSlab& w) { return SlabPosterior::weibull(w, q, mu); }},
      prior.slab);

  if (p >= 1.0) {
    const double lm = branch.log_evidence();
    return MixedPosterior(0.0, std::move(branch), lm);
  }
  const double log_spike = std::log1p(-p) + log_normal_pdf(q, mu);
  const double log_slab = std::log(p) + branch.log_evidence();
  const double hi = std::max(log_spike, log_slab);
  const double log_marginal = hi + std::log(std::exp(log_spike - hi) + std::exp(log_slab - hi));
  const double zero_mass = 1.0 / (1.0 + std::exp(log_slab - log_spike));
  const double slab_mass = 1.0 / (1.0 + std::exp(log_spike - log_slab));
  return MixedPosterior(zero_mass, std::move(branch), log_marginal, slab_mass);
}

double support_probability(double p, double slab_variance, double q, double mu) {
  const double snr = slab_variance / mu;
  const double log_odds_zero = std::log((1.0 - p) / p) + 0.5 * std::log1p(snr) -
                               0.5 * q * q * snr / (slab_variance + mu);
  return 1.0 / (1.0 + std::exp(log_odds_zero));
}

}  // namespace mmue
