#pragma once

#include <array>
#include <cstddef>

namespace mmue::quad {

/// Gauss–Legendre rule on [-1, 1], nodes ascending.
template <std::size_t N>
struct Rule {
  std::array<double, N> nodes;
  std::array<double, N> weights;
};

const Rule<16>& gauss_legendre16();
const Rule<8>& gauss_legendre8();

/// Same rules mapped to [0, 1].
const Rule<16>& unit_gauss_legendre16();
const Rule<8>& unit_gauss_legendre8();

/// ∫_a^b f(u) du with f smooth on (a, b) except possibly at `b` (kink or
/// integrable cusp), using u = b - (b - a) s^2.
template <class F>
double integrate_graded_toward_upper(F&& f, double a, double b) {
  const auto& r = unit_gauss_legendre16();
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double s = r.nodes[k];
    acc += r.weights[k] * 2.0 * len * s * f(b - len * s * s);
  }
  return acc;
}

/// Mirror of integrate_graded_toward_upper: singular point at `a`.
template <class F>
double integrate_graded_toward_lower(F&& f, double a, double b) {
  const auto& r = unit_gauss_legendre16();
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t k = 0; k < 16; ++k) {
    const double s = r.nodes[k];
    acc += r.weights[k] * 2.0 * len * s * f(a + len * s * s);
  }
  return acc;
}

/// Plain 16-point rule on [a, b].
template <class F>
double integrate_gl16(F&& f, double a, double b) {
  const auto& r = unit_gauss_legendre16();
  const double len = b - a;
  double acc = 0.0;
  for (std::size_t k = 0; k < 16; ++k) acc += r.weights[k] * f(a + len * r.nodes[k]);
  return acc * len;
}

}  // namespace mmue::quad
