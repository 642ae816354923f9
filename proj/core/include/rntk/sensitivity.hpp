#pragma once

#include "rntk/kernel.hpp"

#include <cstdint>
#include <vector>

namespace rntk {

struct SensitivityConfig {
  std::size_t length = 100;
  std::size_t input_dim = 1;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  double fd_step = 1e-3;
};

/// Trial-mean of s(t) = |grad_{x_t} theta(x, x')| for standard normal x, x'.
struct SensitivityProfile {
  std::vector<double> raw;
  /// raw / max(raw)
  std::vector<double> normalized;
  RntkParams params;
  SensitivityConfig config;
};

/// Per-step gradient norms of theta(x, x2) with respect to x, by central
/// differences on every input coordinate.
std::vector<double> sensitivity_single(const RntkParams& params, const Sequence& x, const Sequence& x2,
                                       double fd_step);

/// Throws NumericError naming the step and trial if a kernel value is not
/// finite. Trials run in parallel on derived streams; the result does not
/// depend on the worker count.
SensitivityProfile sensitivity_profile(const RntkParams& params, const SensitivityConfig& config);

/// Divides by the maximum; throws NumericError on an all-zero profile.
std::vector<double> normalize_profile(const std::vector<double>& raw);

}  // namespace rntk
