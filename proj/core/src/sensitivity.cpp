#include "rntk/sensitivity.hpp"

#include "rntk/error.hpp"
#include "rntk/parallel.hpp"
#include "rntk/random.hpp"

#include <algorithm>
#include <cmath>
#include <span>

namespace rntk {

std::vector<double> sensitivity_single(const RntkParams& params, const Sequence& x, const Sequence& x2,
                                       double fd_step) {
  if (!(fd_step > 0.0)) {
    throw InputError("finite-difference step must be positive");
  }
  require_same_dim(x, x2);
  const SelfKernel self2 = self_kernel(params, x2);
  auto theta_at = [&](const Eigen::MatrixXd& data) {
    const Sequence moved(data);
    return rntk_pair(params, moved, x2, self_kernel(params, moved), self2).theta;
  };

  std::vector<double> out(x.length());
  Eigen::MatrixXd data = x.data();
  for (std::size_t t = 0; t < x.length(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    double sq = 0.0;
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      const double keep = data(ti, j);
      data(ti, j) = keep + fd_step;
      const double up = theta_at(data);
      data(ti, j) = keep - fd_step;
      const double down = theta_at(data);
      data(ti, j) = keep;
      const double d = (up - down) / (2.0 * fd_step);
      sq += d * d;
    }
    out[t] = std::sqrt(sq);
  }
  return out;
}

std::vector<double> normalize_profile(const std::vector<double>& raw) {
  if (raw.empty()) {
    throw InputError("cannot normalize an empty profile");
  }
  const double peak = *std::max_element(raw.begin(), raw.end());
  if (!(peak > 0.0) || !std::isfinite(peak)) {
    throw NumericError("sensitivity profile has no positive finite maximum");
  }
  std::vector<double> out(raw.size());
  std::transform(raw.begin(), raw.end(), out.begin(), [peak](double v) { return v / peak; });
  return out;
}

SensitivityProfile sensitivity_profile(const RntkParams& params, const SensitivityConfig& config) {
  params.validate();
  if (config.length < 1 || config.input_dim < 1 || config.trials < 1) {
    throw InputError("sensitivity needs positive length, dimension and trial count");
  }
  const auto rows = static_cast<Eigen::Index>(config.length);
  const auto cols = static_cast<Eigen::Index>(config.input_dim);
  std::vector<std::vector<double>> per_trial(config.trials);
  parallel_for(config.trials, [&](std::size_t trial) {
    Rng rng = Rng::substream(config.seed, "trials", {trial});
    Eigen::MatrixXd a(rows, cols);
    Eigen::MatrixXd b(rows, cols);
    rng.fill_normal(std::span<double>(a.data(), static_cast<std::size_t>(a.size())));
    rng.fill_normal(std::span<double>(b.data(), static_cast<std::size_t>(b.size())));
    std::vector<double> s;
    try {
      s = sensitivity_single(params, Sequence(a), Sequence(b), config.fd_step);
    } catch (const NumericError& e) {
      throw NumericError("trial " + std::to_string(trial) + ": " + e.what());
    }
    for (std::size_t t = 0; t < s.size(); ++t) {
      if (!std::isfinite(s[t])) {
        throw NumericError("non-finite sensitivity at step " + std::to_string(t + 1) + ", trial " +
                           std::to_string(trial));
      }
    }
    per_trial[trial] = std::move(s);
  });

  SensitivityProfile out;
  out.params = params;
  out.config = config;
  out.raw.assign(config.length, 0.0);
  for (const auto& s : per_trial) {
    for (std::size_t t = 0; t < s.size(); ++t) out.raw[t] += s[t];
  }
  for (double& v : out.raw) v /= static_cast<double>(config.trials);
  out.normalized = normalize_profile(out.raw);
  return out;
}

}  // namespace rntk
