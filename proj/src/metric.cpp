#include "mmue/metric.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

namespace mmue {
namespace {

double parse_number(const std::string& text, const std::string& whole) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty())
    throw InvalidArgument(fmt::format("bad metric parameter in '{}'", whole));
  return v;
}

}  // namespace

ErrorMetric ErrorMetric::power(double exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent))
    throw InvalidArgument(fmt::format("power metric needs a positive exponent, got {}", exponent));
  return ErrorMetric(Kind::Power, exponent);
}

ErrorMetric ErrorMetric::weighted_support(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw InvalidArgument(fmt::format("weighted support needs beta in [0,1], got {}", beta));
  return ErrorMetric(Kind::WeightedSupport, beta);
}

ErrorMetric ErrorMetric::custom(std::string name, Distance d) {
  if (!d) throw InvalidArgument("custom metric needs a distance function");
  ErrorMetric m(Kind::Custom, 0.0);
  m.custom_name_ = std::move(name);
  m.custom_ = std::move(d);
  return m;
}

ErrorMetric ErrorMetric::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  auto no_arg = [&] {
    if (colon != std::string::npos)
      throw InvalidArgument(fmt::format("metric '{}' takes no parameter", head));
  };
  if (head == "squared" || head == "mse") {
    no_arg();
    return squared();
  }
  if (head == "absolute" || head == "mae") {
    no_arg();
    return absolute();
  }
  if (head == "support") {
    no_arg();
    return support();
  }
  if (head == "power") return power(parse_number(arg, text));
  if (head == "wsupport") return weighted_support(parse_number(arg, text));
  throw InvalidArgument(fmt::format("unknown metric '{}'", text));
}

std::string ErrorMetric::name() const {
  switch (kind_) {
    case Kind::Squared: return "squared";
    case Kind::Absolute: return "absolute";
    case Kind::Power: return fmt::format("power:{}", param_);
    case Kind::Support: return "support";
    case Kind::WeightedSupport: return fmt::format("wsupport:{}", param_);
    case Kind::Custom: return custom_name_;
  }
  return {};
}

}  // namespace mmue
