#include "rntk/activation.hpp"

#include "rntk/error.hpp"
#include "rntk/random.hpp"

#include <cmath>
#include <numbers>

namespace rntk {

struct Activation::CustomData {
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string name;
  std::vector<double> base;
};

namespace {

const std::string kReluName = "relu";
const std::string kErfName = "erf";
const std::vector<double> kNoSamples;

}  // namespace

Activation Activation::relu() { return Activation(ActivationKind::ReLU); }

Activation Activation::erf() { return Activation(ActivationKind::Erf); }

Activation Activation::custom(std::function<double(double)> phi,
                              std::function<double(double)> phi_prime,
                              std::size_t mc_samples, std::uint64_t seed, std::string name) {
  if (!phi || !phi_prime) {
    throw InputError("custom activation needs both the function and its derivative");
  }
  if (mc_samples == 0) {
    throw InputError("custom activation needs at least one Monte Carlo sample");
  }
  auto data = std::make_shared<CustomData>();
  data->phi = std::move(phi);
  data->phi_prime = std::move(phi_prime);
  data->samples = mc_samples;
  data->seed = seed;
  data->name = std::move(name);
  data->base.resize(2 * mc_samples);
  Rng rng = Rng::substream(seed, "kernel-mc");
  rng.fill_normal(data->base);

  Activation activation(ActivationKind::Custom);
  activation.custom_ = std::move(data);
  return activation;
}

const std::string& Activation::name() const {
  switch (kind_) {
    case ActivationKind::ReLU:
      return kReluName;
    case ActivationKind::Erf:
      return kErfName;
    case ActivationKind::Custom:
      break;
  }
  return custom_->name;
}

double Activation::value(double x) const {
  switch (kind_) {
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Erf:
      return std::erf(x);
    case ActivationKind::Custom:
      break;
  }
  return custom_->phi(x);
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case ActivationKind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Erf:
      return 2.0 / std::sqrt(std::numbers::pi) * std::exp(-x * x);
    case ActivationKind::Custom:
      break;
  }
  return custom_->phi_prime(x);
}

std::size_t Activation::mc_samples() const { return custom_ ? custom_->samples : 0; }

std::uint64_t Activation::mc_seed() const { return custom_ ? custom_->seed : 0; }

const std::vector<double>& Activation::base_samples() const {
  return custom_ ? custom_->base : kNoSamples;
}

}  // namespace rntk
