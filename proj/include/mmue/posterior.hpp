#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "mmue/prior.hpp"
#include "mmue/quadrature.hpp"

namespace mmue {

/// Discrete measure (nodes ascending, masses summing to one) used for cheap
/// scans where a few digits suffice.
struct CoarseTable {
  static constexpr std::size_t kSize = 64;
  std::array<double, kSize> x;
  std::array<double, kSize> mass;
};

/// Tabulation of a continuous density on quadrature nodes.
struct DensityTable {
  std::vector<double> grid;     // strictly increasing abscissae
  std::vector<double> density;  // normalized density at grid
  std::vector<double> weight;   // quadrature weight (dx) at grid
};

/// Continuous ("slab") branch of the scalar posterior, normalized to unit mass.
///
/// Integrals are carried out in a working coordinate u with x = x(u):
///  - Gaussian slab: the branch is exactly N(mean, var); u is the standardized
///    coordinate on [-8, 8], 16 panels of 16 Gauss–Legendre nodes.
///  - Weibull slab: u^g = (x/λ)^k with integer g = max(1, ceil(2k)), so the
///    prior becomes g u^{g-1} e^{-u^g} du and x(u) has no singular derivative
///    at the origin; the panel count doubles until the normalizer, mean and
///    variance settle to 1e-11.
class SlabPosterior {
 public:
  enum class Kind { Gaussian, Weibull };

  static SlabPosterior gaussian(double mean, double variance);
  /// ∝ slab(x) N(q - x; 0, mu) on x >= 0.
  static SlabPosterior weibull(const WeibullSlab& slab, double q, double mu);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double variance() const { return var_; }
  /// log ∫ slab(x) N(q - x; 0, mu) dx for the Weibull branch (set by the caller for Gaussian).
  double log_evidence() const { return log_evidence_; }
  void set_log_evidence(double v) { log_evidence_ = v; }

  /// x-range carrying all but a negligible fraction of the mass.
  double lower() const { return x_of_u(u_lo_); }
  double upper() const { return x_of_u(u_hi_); }

  double density(double x) const;
  double cdf(double x) const;
  double quantile(double prob) const;

  /// ∫ h(x) g(x) dx.
  template <class F>
  double expect(F&& h) const;

  /// Same integral with a breakpoint at xb: the panel containing xb is split
  /// and each half uses a rule graded toward xb, so kinks and cusps of h at xb
  /// (|xb - x|^a, indicator jumps) do not spoil the quadrature.
  template <class F>
  double expect_split(F&& h, double xb) const;

  CoarseTable coarse_table() const;
  DensityTable tabulate() const;

  std::size_t panel_count() const { return panels_; }

 private:
  SlabPosterior() = default;

  double x_of_u(double u) const;
  double u_of_x(double x) const;
  /// Normalized density with respect to du.
  double density_u(double u) const;
  double panel_width() const { return (u_hi_ - u_lo_) / static_cast<double>(panels_); }

  // Per-node data in u order. Gaussian branches share static standardized tables.
  const double* node_u() const;
  const double* node_mass() const;
  std::size_t node_count() const { return panels_ * 16; }

  Kind kind_ = Kind::Gaussian;
  double mean_ = 0.0;
  double var_ = 0.0;
  double sd_ = 0.0;
  double log_evidence_ = 0.0;
  double u_lo_ = 0.0;
  double u_hi_ = 0.0;
  std::size_t panels_ = 0;

  // Weibull state.
  double scale_ = 1.0;
  double shape_ = 1.0;
  double grade_ = 1.0;
  double q_ = 0.0;
  double mu_ = 1.0;
  double log_norm_ = 0.0;  // log ∫ exp(log_weight(u)) du
  std::vector<double> u_;
  std::vector<double> mass_;
  std::vector<double> cum_;  // cumulative mass at panel boundaries, size panels_ + 1

  double log_weight(double u) const;  // Weibull, unnormalized
};

/// Law of X given Q = q for Q = X + N(0, mu), X ~ prior: an atom at zero plus
/// a continuous part.
class MixedPosterior {
 public:
  /// `slab_mass` defaults to 1 - zero_mass; pass it when the atom is close to
  /// one and the complement would lose digits.
  MixedPosterior(double zero_mass, std::optional<SlabPosterior> slab, double log_marginal = NAN,
                 double slab_mass = NAN)
      : zero_mass_(zero_mass),
        slab_mass_(std::isnan(slab_mass) ? 1.0 - zero_mass : slab_mass),
        log_marginal_(log_marginal),
        slab_(std::move(slab)) {}

  double zero_mass() const { return zero_mass_; }
  double slab_mass() const { return slab_ ? slab_mass_ : 0.0; }
  const SlabPosterior* slab() const { return slab_ ? &*slab_ : nullptr; }
  /// log f_Q(q), the marginal density of the observation.
  double log_marginal() const { return log_marginal_; }

  double mean() const;
  double variance() const;

  /// Right-continuous CDF; jumps by zero_mass() at 0.
  double cdf(double x) const;
  /// Left limit F(x-).
  double cdf_left(double x) const;

  /// Smallest x with F(x) >= 1/2. Exactly 0 whenever 1/2 falls inside the atom.
  double median() const;

  /// Span covering the atom and the continuous part.
  double lower() const;
  double upper() const;

  template <class F>
  double expect(F&& h) const {
    double acc = zero_mass_ > 0.0 ? zero_mass_ * h(0.0) : 0.0;
    if (slab_ && slab_mass_ > 0.0) acc += slab_mass_ * slab_->expect(h);
    return acc;
  }

  template <class F>
  double expect_split(F&& h, double xb) const {
    double acc = zero_mass_ > 0.0 ? zero_mass_ * h(0.0) : 0.0;
    if (slab_ && slab_mass_ > 0.0) acc += slab_mass_ * slab_->expect_split(h, xb);
    return acc;
  }

 private:
  double zero_mass_;
  double slab_mass_;
  double log_marginal_;
  std::optional<SlabPosterior> slab_;
};

/// Exact posterior of x_j given q_j through the scalar Gaussian channel.
MixedPosterior posterior(const SignalPrior& prior, double q, double mu);

/// Pr(B = 1 | q) for the Gaussian slab (closed form, log-odds evaluated stably).
double support_probability(double p, double slab_variance, double q, double mu);

// ---------------------------------------------------------------------------

namespace detail {
/// Standardized tables shared by every Gaussian branch: 16 panels x 16 nodes on [-8, 8].
struct StandardNormalTable {
  static constexpr std::size_t kPanels = 16;
  static constexpr double kHalfWidth = 8.0;
  std::array<double, kPanels * 16> z;
  std::array<double, kPanels * 16> mass;  // φ(z) dz, renormalized to sum to one
};
const StandardNormalTable& standard_normal_table();
}  // namespace detail

template <class F>
double SlabPosterior::expect(F&& h) const {
  const double* u = node_u();
  const double* m = node_mass();
  const std::size_t n = node_count();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += m[i] * h(x_of_u(u[i]));
  return acc;
}

template <class F>
double SlabPosterior::expect_split(F&& h, double xb) const {
  const double ub = u_of_x(xb);
  if (!(ub > u_lo_ && ub < u_hi_)) return expect(h);
  const double width = panel_width();
  std::size_t split = static_cast<std::size_t>((ub - u_lo_) / width);
  if (split >= panels_) split = panels_ - 1;
  const double* u = node_u();
  const double* m = node_mass();
  double acc = 0.0;
  for (std::size_t p = 0; p < panels_; ++p) {
    if (p == split) continue;
    for (std::size_t k = p * 16; k < p * 16 + 16; ++k) acc += m[k] * h(x_of_u(u[k]));
  }
  const double a = u_lo_ + width * static_cast<double>(split);
  const double b = split + 1 == panels_ ? u_hi_ : a + width;
  auto f = [&](double uu) { return h(x_of_u(uu)) * density_u(uu); };
  if (ub > a) acc += quad::integrate_graded_toward_upper(f, a, ub);
  if (ub < b) acc += quad::integrate_graded_toward_lower(f, ub, b);
  return acc;
}

}  // namespace mmue
