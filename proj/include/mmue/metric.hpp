#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <Eigen/Core>

#include "mmue/error.hpp"

namespace mmue {

/// Additive pointwise error metric d(x̂, x).
class ErrorMetric {
 public:
  enum class Kind { Squared, Absolute, Power, Support, WeightedSupport, Custom };
  using Distance = std::function<double(double, double)>;

  static ErrorMetric squared() { return ErrorMetric(Kind::Squared, 2.0); }
  static ErrorMetric absolute() { return ErrorMetric(Kind::Absolute, 1.0); }
  static ErrorMetric power(double exponent);
  static ErrorMetric support() { return ErrorMetric(Kind::Support, 0.0); }
  static ErrorMetric weighted_support(double beta);
  /// d must be nonnegative and finite; d(x, x) = 0 is not checked.
  static ErrorMetric custom(std::string name, Distance d);

  /// Parses "squared", "absolute", "power:<p>", "support", "wsupport:<beta>".
  static ErrorMetric parse(const std::string& text);

  Kind kind() const { return kind_; }
  /// Exponent for Power (2 for Squared, 1 for Absolute).
  double exponent() const { return param_; }
  double beta() const { return param_; }
  bool is_support() const { return kind_ == Kind::Support || kind_ == Kind::WeightedSupport; }

  /// Stable identifier, e.g. "power:0.5"; parse(name()) round-trips.
  std::string name() const;

  double operator()(double x_hat, double x) const {
    switch (kind_) {
      case Kind::Squared: return (x_hat - x) * (x_hat - x);
      case Kind::Absolute: return std::abs(x_hat - x);
      case Kind::Power: return std::pow(std::abs(x_hat - x), param_);
      case Kind::Support: return (x_hat != 0.0) != (x != 0.0) ? 1.0 : 0.0;
      case Kind::WeightedSupport:
        if (x_hat != 0.0 && x == 0.0) return param_;
        if (x_hat == 0.0 && x != 0.0) return 1.0 - param_;
        return 0.0;
      case Kind::Custom: return custom_(x_hat, x);
    }
    return 0.0;
  }

 private:
  ErrorMetric(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
  std::string custom_name_;
  Distance custom_;
};

/// D(x̂, x) = Σ_j d(x̂_j, x_j), summed in index order.
template <class A, class B>
typename A::Scalar evaluate_error(const ErrorMetric& metric, const Eigen::MatrixBase<A>& x_hat,
                                  const Eigen::MatrixBase<B>& x) {
  if (x_hat.size() != x.size()) throw InvalidArgument("evaluate_error: length mismatch");
  typename A::Scalar acc(0);
  for (Eigen::Index j = 0; j < x.size(); ++j) acc += metric(x_hat(j), x(j));
  return acc;
}

}  // namespace mmue
