#pragma once

#include "rntk/baseline.hpp"
#include "rntk/datasets.hpp"
#include "rntk/kernel.hpp"

#include <string>
#include <variant>
#include <vector>

namespace rntk {

/// One kernel hyperparameter setting: the recurrent kernel (theta or nngp)
/// or a baseline.
struct RntkChoice {
  RntkParams params;
  KernelKind kind = KernelKind::Theta;
};
using KernelChoice = std::variant<RntkChoice, BaselineParams>;

/// A named kernel family with its candidate settings. An empty candidate
/// list denotes the previous-time-step predictor.
struct KernelFamily {
  std::string name;
  std::vector<KernelChoice> candidates;
};

struct RegressionOutcome {
  std::string name;
  double snr_db = 0.0;
  /// NaN for the previous-time-step predictor.
  double lambda = 0.0;
  std::size_t candidate = 0;
  std::string descriptor;
};

/// Gram matrix of one candidate over `data`, padded to `pad_steps` for baselines.
GramMatrix candidate_gram(const KernelChoice& choice, const std::vector<Sequence>& data, std::size_t pad_steps);
Eigen::MatrixXd candidate_cross(const KernelChoice& choice, const std::vector<Sequence>& rows,
                                const std::vector<Sequence>& cols, std::size_t pad_steps);
std::string describe(const KernelChoice& choice);

/// For each family: k-fold selection of (candidate, lambda) on the training
/// windows, refit on all of them, SNR of the test predictions. All families
/// share the folds drawn from `seed`. SNR is +inf when the relative residual
/// is at most `exact_tolerance`.
std::vector<RegressionOutcome> evaluate_regression(const WindowedRegressionTask& task,
                                                   const std::vector<KernelFamily>& families,
                                                   const std::vector<double>& lambdas, std::size_t folds,
                                                   std::uint64_t seed, double exact_tolerance = 0.0);

/// Hyperparameter grids of the published regression comparison.
/// Recurrent kernel: ReLU, one layer, sigma_u = 1, sigma_w in 1.34..1.47,
/// sigma_b in {0..2}, sigma_h in {0..1}. MLP NTK: 1-10 layers, sigma_w in
/// {0.5..3}, sigma_b in {0..5}. RBF alpha in {0.01..100}. Polynomial
/// degree 1-5, offset in {0..2}.
std::vector<KernelChoice> standard_grid(const std::string& family, PaddingPolicy padding = PaddingPolicy::ZeroPadToMax);

/// Ridge grid of the published regression comparison, 0 to 100.
std::vector<double> standard_lambdas();

}  // namespace rntk
