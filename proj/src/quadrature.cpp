#include "mmue/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace mmue::quad {
namespace {

template <std::size_t N>
Rule<N> build_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& absc = G::abscissa();  // nonnegative half, ascending
  const auto& wts = G::weights();
  Rule<N> r{};
  const std::size_t half = N / 2;
  for (std::size_t i = 0; i < half; ++i) {
    r.nodes[half - 1 - i] = -absc[i];
    r.weights[half - 1 - i] = wts[i];
    r.nodes[half + i] = absc[i];
    r.weights[half + i] = wts[i];
  }
  return r;
}

template <std::size_t N>
Rule<N> to_unit(const Rule<N>& r) {
  Rule<N> u{};
  for (std::size_t i = 0; i < N; ++i) {
    u.nodes[i] = 0.5 * (r.nodes[i] + 1.0);
    u.weights[i] = 0.5 * r.weights[i];
  }
  return u;
}

}  // namespace

const Rule<16>& gauss_legendre16() {
  static const Rule<16> r = build_rule<16>();
  return r;
}
const Rule<8>& gauss_legendre8() {
  static const Rule<8> r = build_rule<8>();
  return r;
}
const Rule<16>& unit_gauss_legendre16() {
  static const Rule<16> r = to_unit(gauss_legendre16());
  return r;
}
const Rule<8>& unit_gauss_legendre8() {
  static const Rule<8> r = to_unit(gauss_legendre8());
  return r;
}

}  // namespace mmue::quad
