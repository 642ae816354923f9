#pragma once

#include "rntk/sequence.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rntk {

struct WindowConfig {
  std::size_t t_fixed = 10;
  std::size_t t_var = 10;
  double noise_sigma = 0.05;
  std::size_t n_train = 20;
  std::size_t n_test = 5000;
  std::uint64_t seed = 0;
  /// CSV tasks only: standardize each column with train-region statistics.
  bool standardize = true;
};

/// A window of consecutive observations and the observation right after it.
struct LabeledWindow {
  Sequence inputs;
  double target = 0.0;
  /// Index of the first input row in the source series.
  std::size_t start = 0;
};

struct WindowedRegressionTask {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> test;
  WindowConfig config;
  std::string source;
  std::size_t series_length = 0;
  std::size_t split_index = 0;
  /// Per-column standardization (value - shift) / scale; empty if unused.
  std::vector<double> shift;
  std::vector<double> scale;

  std::vector<Sequence> train_inputs() const;
  std::vector<Sequence> test_inputs() const;
  Eigen::VectorXd train_targets() const;
  Eigen::VectorXd test_targets() const;
  /// Previous-time-step baseline: the last observed value of each test window.
  Eigen::VectorXd test_last_values() const;

  /// JSON description (config, split, standardization, window starts,
  /// lengths and targets) sufficient to replay the task.
  std::string manifest_json() const;
};

/// One period of sin(2 pi k / 1000), k = 0..999, plus N(0, noise_sigma^2)
/// noise. Windows draw a uniform start and a uniform length in
/// [t_fixed, t_fixed + t_var]; a draw whose target would fall past the end
/// is rejected and redrawn. Train and test windows come from the same
/// noisy series.
WindowedRegressionTask make_sinusoid_task(const WindowConfig& config);

/// Reads a numeric CSV (optional header; one column per input dimension;
/// the first column is the regression target). Train windows and their
/// targets lie entirely before `split_index`; test targets lie at or after
/// it. Throws InputError with the line number on malformed rows.
WindowedRegressionTask make_csv_task(const std::string& path, std::size_t split_index, const WindowConfig& config);

/// Same, from an already loaded series (rows are time steps).
WindowedRegressionTask make_series_task(const Eigen::MatrixXd& series, std::size_t split_index,
                                        const WindowConfig& config, std::string source);

/// Parses CSV text; `origin` is used in error messages.
Eigen::MatrixXd parse_csv(std::istream& in, const std::string& origin);
Eigen::MatrixXd read_csv(const std::string& path);

/// Loads one sequence per CSV file.
std::vector<Sequence> read_sequences(const std::vector<std::string>& paths);

/// Scales each sequence to unit Euclidean norm of its flattened values.
/// Throws InputError on an all-zero sequence.
std::vector<Sequence> normalize_sequences(const std::vector<Sequence>& dataset);

}  // namespace rntk
