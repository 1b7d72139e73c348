#include "mmue/cosamp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace mmue {
namespace {

constexpr double kRidge = 1e-12;
constexpr double kResidualSlack = 1e-10;

// Indices of the `count` largest |v|, ties to the lower index, returned ascending.
std::vector<Eigen::Index> largest(const Eigen::VectorXd& v, Eigen::Index count) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  count = std::min(count, v.size());
  std::partial_sort(idx.begin(), idx.begin() + count, idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double fa = std::abs(v(a)), fb = std::abs(v(b));
    return fa > fb || (fa == fb && a < b);
  });
  idx.resize(static_cast<std::size_t>(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, bool& ridged) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() == a.cols()) return qr.solve(y);
  ridged = true;
  Eigen::MatrixXd gram = a.transpose() * a;
  gram.diagonal().array() += kRidge;
  return gram.ldlt().solve(a.transpose() * y);
}

}  // namespace

void validate(const CosampConfig& config, Eigen::Index n) {
  if (config.sparsity_k < 1 || config.sparsity_k > n)
    throw InvalidArgument(fmt::format("cosamp: sparsity_k must lie in [1, {}], got {}", n, config.sparsity_k));
  if (config.max_iterations < 1) throw InvalidArgument("cosamp: max_iterations must be positive");
  if (!(config.halting_tolerance > 0.0)) throw InvalidArgument("cosamp: halting_tolerance must be positive");
}

Eigen::Index default_sparsity(double p, Eigen::Index n) {
  return std::max<Eigen::Index>(1, static_cast<Eigen::Index>(std::ceil(p * static_cast<double>(n))));
}

CosampResult cosamp(const Eigen::VectorXd& y, const Eigen::MatrixXd& phi, const CosampConfig& config) {
  const Eigen::Index n = phi.cols();
  validate(config, n);
  if (y.size() != phi.rows()) throw InvalidArgument("cosamp: dimension mismatch");

  CosampResult res;
  res.x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = y;
  double rnorm = r.norm();
  if (rnorm == 0.0) return res;

  std::vector<Eigen::Index> support;
  for (int it = 0; it < config.max_iterations; ++it) {
    const Eigen::VectorXd proxy = phi.transpose() * r;
    std::vector<Eigen::Index> merged = largest(proxy, 2 * config.sparsity_k);
    merged.insert(merged.end(), support.begin(), support.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    Eigen::MatrixXd sub(phi.rows(), static_cast<Eigen::Index>(merged.size()));
    for (std::size_t c = 0; c < merged.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = phi.col(merged[c]);
    const Eigen::VectorXd b = least_squares(sub, y, res.rank_deficient);

    const std::vector<Eigen::Index> keep = largest(b, config.sparsity_k);
    Eigen::VectorXd x_new = Eigen::VectorXd::Zero(n);
    std::vector<Eigen::Index> new_support;
    for (Eigen::Index c : keep) {
      x_new(merged[static_cast<std::size_t>(c)]) = b(c);
      new_support.push_back(merged[static_cast<std::size_t>(c)]);
    }
    const Eigen::VectorXd r_new = y - phi * x_new;
    const double new_norm = r_new.norm();
    // Pruning can in principle raise the residual; keep the previous iterate then.
    if (new_norm > rnorm * (1.0 + kResidualSlack)) break;

    res.x = x_new;
    res.iterations = it + 1;
    res.residual_norms.push_back(new_norm);
    support = std::move(new_support);
    r = r_new;
    const double change = rnorm - new_norm;
    rnorm = new_norm;
    if (change <= config.halting_tolerance * (rnorm + change) || rnorm <= config.halting_tolerance * y.norm())
      break;
  }
  return res;
}

CosampResult cosamp(const ProblemInstance& instance, const CosampConfig& config) {
  if (!is_awgn(instance.channel)) {
    CosampResult res;
    res.status = CosampStatus::ChannelUnsupported;
    res.x = Eigen::VectorXd::Zero(instance.n());
    return res;
  }
  return cosamp(instance.y, instance.phi, config);
}

}  // namespace mmue
