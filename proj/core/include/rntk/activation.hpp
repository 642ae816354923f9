#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace rntk {

enum class ActivationKind { ReLU, Erf, Custom };

/// Pointwise nonlinearity together with its derivative.
///
/// ReLU and Erf have closed-form Gaussian expectations. Custom activations
/// carry a fixed set of standard-normal sample pairs, drawn once from the
/// caller's seed, that are reused for every Monte Carlo expectation so the
/// resulting kernels are deterministic.
class Activation {
 public:
  static Activation relu();
  static Activation erf();
  static Activation custom(std::function<double(double)> phi,
                           std::function<double(double)> phi_prime,
                           std::size_t mc_samples, std::uint64_t seed,
                           std::string name = "custom");

  ActivationKind kind() const { return kind_; }
  const std::string& name() const;

  double value(double x) const;
  /// ReLU'(0) is taken to be 0.
  double derivative(double x) const;

  std::size_t mc_samples() const;
  std::uint64_t mc_seed() const;
  /// Interleaved standard-normal pairs (u1, u2) for Monte Carlo; empty for
  /// the closed-form activations.
  const std::vector<double>& base_samples() const;

 private:
  struct CustomData;
  explicit Activation(ActivationKind kind) : kind_(kind) {}

  ActivationKind kind_ = ActivationKind::ReLU;
  std::shared_ptr<const CustomData> custom_;
};

}  // namespace rntk
