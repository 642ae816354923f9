#include "rntk/vphi.hpp"

#include "rntk/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rntk {

namespace {

constexpr double kPi = std::numbers::pi;

double correlation(const BivariateCov& cov) {
  const double c = cov.k3 / std::sqrt(cov.k1 * cov.k2);
  return std::clamp(c, -1.0, 1.0);
}

template <typename F>
double monte_carlo(const BivariateCov& raw, const std::vector<double>& base, F&& product) {
  if (base.size() < 2) {
    throw InputError("Monte Carlo expectation needs at least one sample pair");
  }
  const BivariateCov cov = raw.clamped();
  const double a = std::sqrt(cov.k1);
  double b = 0.0;
  double c = std::sqrt(cov.k2);
  if (cov.k1 > 0.0) {
    b = cov.k3 / a;
    c = std::sqrt(std::max(0.0, cov.k2 - b * b));
  }
  const std::size_t pairs = base.size() / 2;
  double sum = 0.0;
  double compensation = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double u1 = base[2 * i];
    const double u2 = base[2 * i + 1];
    const double term = product(a * u1, b * u1 + c * u2) - compensation;
    const double next = sum + term;
    compensation = (next - sum) - term;
    sum = next;
  }
  const double mean = sum / static_cast<double>(pairs);
  if (!std::isfinite(mean)) {
    throw NumericError("Monte Carlo expectation is not finite");
  }
  return mean;
}

}  // namespace

BivariateCov BivariateCov::clamped() const {
  if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(k3)) {
    throw NumericError("covariance entries must be finite");
  }
  const double tol = 1e-12 * std::max({1.0, std::abs(k1), std::abs(k2)});
  if (k1 < -tol || k2 < -tol) {
    throw InputError("covariance has a negative variance");
  }
  BivariateCov out{std::max(k1, 0.0), std::max(k2, 0.0), k3};
  const double bound = std::sqrt(out.k1 * out.k2);
  out.k3 = std::clamp(out.k3, -bound, bound);
  return out;
}

double vphi(const Activation& activation, const BivariateCov& raw) {
  switch (activation.kind()) {
    case ActivationKind::ReLU: {
      const BivariateCov cov = raw.clamped();
      const double scale = std::sqrt(cov.k1 * cov.k2);
      if (scale == 0.0) {
        return 0.0;
      }
      const double c = correlation(cov);
      return (c * (kPi - std::acos(c)) + std::sqrt(1.0 - c * c)) * scale / (2.0 * kPi);
    }
    case ActivationKind::Erf: {
      const BivariateCov cov = raw.clamped();
      const double denom = std::sqrt((1.0 + 2.0 * cov.k1) * (1.0 + 2.0 * cov.k2));
      const double arg = std::clamp(2.0 * cov.k3 / denom, -1.0, 1.0);
      return 2.0 / kPi * std::asin(arg);
    }
    case ActivationKind::Custom:
      break;
  }
  return vphi_monte_carlo(activation, raw, activation.base_samples());
}

double vphi_prime(const Activation& activation, const BivariateCov& raw) {
  switch (activation.kind()) {
    case ActivationKind::ReLU: {
      const BivariateCov cov = raw.clamped();
      if (cov.k1 == 0.0 && cov.k2 == 0.0) {
        return 0.0;
      }
      if (cov.k1 == 0.0 || cov.k2 == 0.0) {
        return 0.25;
      }
      return (kPi - std::acos(correlation(cov))) / (2.0 * kPi);
    }
    case ActivationKind::Erf: {
      const BivariateCov cov = raw.clamped();
      const double radicand = (1.0 + 2.0 * cov.k1) * (1.0 + 2.0 * cov.k2) - 4.0 * cov.k3 * cov.k3;
      if (!(radicand > 0.0)) {
        throw NumericError("erf derivative expectation has a nonpositive radicand");
      }
      return 4.0 / (kPi * std::sqrt(radicand));
    }
    case ActivationKind::Custom:
      break;
  }
  return vphi_prime_monte_carlo(activation, raw, activation.base_samples());
}

double vphi_monte_carlo(const Activation& activation, const BivariateCov& cov,
                        const std::vector<double>& base_samples) {
  return monte_carlo(cov, base_samples, [&](double z1, double z2) {
    return activation.value(z1) * activation.value(z2);
  });
}

double vphi_prime_monte_carlo(const Activation& activation, const BivariateCov& cov,
                              const std::vector<double>& base_samples) {
  return monte_carlo(cov, base_samples, [&](double z1, double z2) {
    return activation.derivative(z1) * activation.derivative(z2);
  });
}

}  // namespace rntk
