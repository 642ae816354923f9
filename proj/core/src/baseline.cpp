#include "rntk/baseline.hpp"

#include "rntk/error.hpp"
#include "rntk/parallel.hpp"
#include "rntk/vphi.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rntk {

namespace {

Eigen::VectorXd padded(const Sequence& x, std::size_t steps) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(steps * x.dim()));
  out.head(static_cast<Eigen::Index>(x.length() * x.dim())) = x.flattened();
  return out;
}

std::size_t longest(const std::vector<Sequence>& a, const std::vector<Sequence>& b = {}) {
  std::size_t out = 0;
  for (const auto& s : a) out = std::max(out, s.length());
  for (const auto& s : b) out = std::max(out, s.length());
  return out;
}

}  // namespace

void BaselineParams::validate() const {
  switch (kind) {
    case BaselineKind::Rbf:
      if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("rbf alpha must be positive");
      break;
    case BaselineKind::Polynomial:
      if (degree < 1) throw InputError("polynomial degree must be at least 1");
      if (!(offset >= 0.0) || !std::isfinite(offset)) throw InputError("polynomial offset must be nonnegative");
      break;
    case BaselineKind::MlpNtk:
      if (depth < 1) throw InputError("mlp-ntk depth must be at least 1");
      if (!(sigma_w > 0.0) || !std::isfinite(sigma_w)) throw InputError("mlp-ntk sigma_w must be positive");
      if (!(sigma_b >= 0.0) || !std::isfinite(sigma_b)) throw InputError("mlp-ntk sigma_b must be nonnegative");
      break;
  }
}

std::string BaselineParams::describe() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case BaselineKind::Rbf:
      out << "rbf alpha=" << alpha;
      break;
    case BaselineKind::Polynomial:
      out << "poly degree=" << degree << " offset=" << offset;
      break;
    case BaselineKind::MlpNtk:
      out << "mlp-ntk depth=" << depth << " sigma_w=" << sigma_w << " sigma_b=" << sigma_b
          << " activation=" << activation.name();
      break;
  }
  out << " padding=" << (padding == PaddingPolicy::ZeroPadToMax ? "zero" : "error");
  return out.str();
}

double mlp_ntk(const BaselineParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& x2) {
  if (x.size() != x2.size() || x.size() == 0) {
    throw InputError("mlp-ntk needs two nonempty vectors of equal size");
  }
  const double w2 = params.sigma_w * params.sigma_w;
  const double b2 = params.sigma_b * params.sigma_b;
  const double d = static_cast<double>(x.size());
  const Activation& act = params.activation;

  // Forward covariances per layer: (Sigma(x,x), Sigma(x',x'), Sigma(x,x')).
  std::vector<BivariateCov> sigma;
  sigma.push_back({w2 * x.squaredNorm() / d + b2, w2 * x2.squaredNorm() / d + b2, w2 * x.dot(x2) / d + b2});
  for (int l = 1; l < params.depth; ++l) {
    const BivariateCov& prev = sigma.back();
    sigma.push_back({w2 * vphi(act, {prev.k1, prev.k1, prev.k1}) + b2,
                     w2 * vphi(act, {prev.k2, prev.k2, prev.k2}) + b2, w2 * vphi(act, prev) + b2});
  }

  // Backward: the product of derivative kernels from layer l to the top.
  double theta = vphi(act, sigma.back());
  double chain = 1.0;
  for (int l = params.depth - 1; l >= 0; --l) {
    const double next = l == params.depth - 1 ? 1.0 : w2;
    chain *= next * vphi_prime(act, sigma[static_cast<std::size_t>(l)]);
    theta += sigma[static_cast<std::size_t>(l)].k3 * chain;
  }
  if (!std::isfinite(theta)) {
    throw NumericError("mlp-ntk value is not finite");
  }
  return theta;
}

double baseline_pair(const BaselineParams& params, const Sequence& x, const Sequence& x2, std::size_t pad_steps) {
  params.validate();
  require_same_dim(x, x2);
  if (x.length() != x2.length() && params.padding == PaddingPolicy::ErrorOnMismatch) {
    throw InputError("sequence lengths differ (" + std::to_string(x.length()) + " vs " +
                     std::to_string(x2.length()) + ") and padding is disabled");
  }
  const std::size_t longer = std::max(x.length(), x2.length());
  if (pad_steps != 0 && pad_steps < longer) {
    throw InputError("padding length " + std::to_string(pad_steps) + " is shorter than a sequence of length " +
                     std::to_string(longer));
  }
  const std::size_t steps = pad_steps == 0 ? longer : pad_steps;
  const Eigen::VectorXd a = padded(x, steps);
  const Eigen::VectorXd b = padded(x2, steps);
  switch (params.kind) {
    case BaselineKind::Rbf:
      return std::exp(-params.alpha * (a - b).squaredNorm());
    case BaselineKind::Polynomial:
      return std::pow(params.offset + a.dot(b), params.degree);
    case BaselineKind::MlpNtk:
      break;
  }
  return mlp_ntk(params, a, b);
}

GramMatrix baseline_gram(const BaselineParams& params, const std::vector<Sequence>& dataset, std::size_t pad_steps) {
  if (dataset.empty()) {
    throw InputError("cannot build a Gram matrix over an empty dataset");
  }
  require_same_dim(dataset);
  const std::size_t steps = pad_steps == 0 ? longest(dataset) : pad_steps;
  const std::size_t n = dataset.size();
  GramMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double value = baseline_pair(params, dataset[i], dataset[j], steps);
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
      out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(dataset[i].id().empty() ? std::to_string(i + 1) : dataset[i].id());
  }
  out.kernel_descriptor = params.describe();
  return out;
}

Eigen::MatrixXd baseline_cross_gram(const BaselineParams& params, const std::vector<Sequence>& rows,
                                    const std::vector<Sequence>& cols, std::size_t pad_steps) {
  const std::size_t steps = pad_steps == 0 ? longest(rows, cols) : pad_steps;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  parallel_for(rows.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = baseline_pair(params, rows[i], cols[j], steps);
    }
  });
  return out;
}

}  // namespace rntk
