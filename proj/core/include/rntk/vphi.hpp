#pragma once

#include "rntk/activation.hpp"

namespace rntk {

/// Covariance of a centered bivariate Gaussian (z1, z2):
/// k1 = Var z1, k2 = Var z2, k3 = Cov(z1, z2).
struct BivariateCov {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;

  /// Throws NumericError on non-finite entries and InputError when a
  /// variance is negative beyond rounding. Returns a copy with tiny negative
  /// variances set to zero and k3 clamped to [-sqrt(k1 k2), sqrt(k1 k2)].
  BivariateCov clamped() const;
};

/// E[phi(z1) phi(z2)] for (z1, z2) ~ N(0, K).
double vphi(const Activation& activation, const BivariateCov& cov);

/// E[phi'(z1) phi'(z2)] for (z1, z2) ~ N(0, K).
///
/// For ReLU with a degenerate variance the value is the limit of the closed
/// form: 0 when both variances vanish, 1/4 when exactly one does.
double vphi_prime(const Activation& activation, const BivariateCov& cov);

/// Monte Carlo estimates with an explicit sample set (interleaved standard
/// normal pairs), used by Custom activations and by validation code.
double vphi_monte_carlo(const Activation& activation, const BivariateCov& cov,
                        const std::vector<double>& base_samples);
double vphi_prime_monte_carlo(const Activation& activation, const BivariateCov& cov,
                              const std::vector<double>& base_samples);

}  // namespace rntk
