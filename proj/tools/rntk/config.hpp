#pragma once

#include <rntk/baseline.hpp>
#include <rntk/datasets.hpp>
#include <rntk/finite_rnn.hpp>
#include <rntk/kernel.hpp>
#include <rntk/regression.hpp>
#include <rntk/sensitivity.hpp>

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rntk::cli {

/// Everything a command may read. Defaults, then the JSON config, then
/// command-line flags (flags win).
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out;

  // kernel
  double sigma_w = 1.4142135623730951;
  double sigma_u = 1.0;
  double sigma_b = 0.0;
  double sigma_h = 0.0;
  double sigma_v = 1.0;
  int depth = 1;
  std::string activation = "relu";
  std::optional<std::vector<LayerSigmas>> per_layer;
  std::size_t mc_samples = 100000;
  std::optional<std::uint64_t> mc_seed;

  // baselines
  double rbf_alpha = 1.0;
  int poly_degree = 2;
  double poly_offset = 1.0;
  int mlp_depth = 1;
  double mlp_sigma_w = 1.4142135623730951;
  double mlp_sigma_b = 0.0;
  std::string padding = "zero";

  // task
  WindowConfig task;
  std::optional<std::string> task_csv;
  std::size_t split_index = 0;
  bool test_on_train = false;

  // gram
  std::string kernel = "rntk";
  std::vector<std::string> inputs;
  bool normalize = false;

  // sensitivity
  SensitivityConfig sensitivity;

  // converge
  ConvergenceConfig converge;

  // drift
  std::vector<std::size_t> drift_widths{64, 256, 1024};
  std::size_t drift_steps = 200;
  std::optional<double> drift_lr;
  double drift_lr_fraction = 0.5;
  std::size_t drift_sequences = 4;
  std::size_t drift_length = 3;
  std::size_t drift_networks = 1;

  // regress
  std::size_t repeats = 10;
  std::vector<std::string> kernels{"rntk", "rbf", "mlp-ntk", "pts"};
  std::optional<double> lambda;
  std::vector<double> lambdas = standard_lambdas();
  std::size_t folds = 5;
  /// "standard": cross-validate over the published hyperparameter grids;
  /// "fixed": use the configured kernel hyperparameters.
  std::string grid = "standard";

  // curve
  std::size_t curve_points = 64;
  std::size_t curve_width = 0;
  std::size_t curve_networks = 100;

  RntkParams rntk_params() const;
  BaselineParams baseline_params(const std::string& kernel_name) const;
  nlohmann::json to_json() const;
};

/// Applies a JSON document; unknown keys and wrong types raise InputError.
void apply_json(RunConfig& config, const nlohmann::json& doc);
void apply_json_file(RunConfig& config, const std::string& path);

}  // namespace rntk::cli
