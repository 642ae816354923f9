#pragma once

#include "rntk/kernel.hpp"
#include "rntk/sequence.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace rntk {

enum class ParamBlock { W, U, b, v };

/// Raw (unscaled) weights of a simple RNN. Indexing is [layer][copy]; a
/// tied network has one copy per layer, an untied one has one per step.
struct ParameterSet {
  std::vector<std::vector<Eigen::MatrixXd>> W;
  std::vector<std::vector<Eigen::MatrixXd>> U;
  std::vector<std::vector<Eigen::VectorXd>> b;
  Eigen::VectorXd v;

  /// Same shapes, all zeros.
  ParameterSet zeros_like() const;
  /// Copy with every block other than `block` set to zero.
  ParameterSet restricted(ParamBlock block) const;
  /// this += a * other
  void axpy(double a, const ParameterSet& other);
  double dot(const ParameterSet& other) const;
  double squared_norm() const { return dot(*this); }
  /// Dot product over a single block.
  double block_dot(const ParameterSet& other, ParamBlock block) const;
};

/// Cached forward pass of one sequence.
struct ForwardPass {
  /// g[l] is n x T; column t holds the layer-l pre-activation at step t.
  std::vector<Eigen::MatrixXd> g;
  /// h[l] is n x (T+1); column 0 is the initial state, column t+1 = phi(g[l](:, t)).
  std::vector<Eigen::MatrixXd> h;
  /// Input sequence as m x T.
  Eigen::MatrixXd x;
  double output = 0.0;
};

/// delta[l] is n x T: derivative of the output with respect to g[l](:, t).
struct BackwardPass {
  std::vector<Eigen::MatrixXd> delta;
};

struct EmpiricalNtkResult {
  double value = 0.0;
  double w = 0.0;
  double u = 0.0;
  double b = 0.0;
  double v = 0.0;
  std::size_t width = 0;
  std::uint64_t seed = 0;
};

/// Finite-width simple RNN in the NTK parametrization:
///   g^{(l,t)} = sigma_w/sqrt(n) W h^{(l,t-1)} + sigma_u/sqrt(k) U in^{(l,t)} + sigma_b b
///   h^{(l,t)} = phi(g^{(l,t)}),   f(x) = sigma_v/sqrt(n) v . h^{(L,T)}
/// where in^{(1,t)} = x_t with k = m, and in^{(l,t)} = h^{(l-1,t)} with
/// k = n above. Raw weights are standard normal.
///
/// The initial state h^{(l,0)}(x) ~ N(0, sigma_h^2 I) is drawn from a stream
/// keyed by the network seed, the layer and the content of x, so identical
/// sequences share it and distinct sequences see independent copies.
class FiniteRnn {
 public:
  /// `steps` is the number of per-step weight copies of an untied network
  /// (ignored when tied); untied networks accept sequences up to that length.
  FiniteRnn(RntkParams params, std::size_t width, std::size_t input_dim, std::uint64_t seed,
            bool tied = true, std::size_t steps = 0);

  /// Network with explicit raw weights; shapes are checked.
  FiniteRnn(RntkParams params, std::size_t input_dim, std::uint64_t seed, ParameterSet weights, bool tied = true);

  std::size_t width() const { return width_; }
  std::size_t input_dim() const { return input_dim_; }
  int depth() const { return params_.depth; }
  bool tied() const { return tied_; }
  std::uint64_t seed() const { return seed_; }
  const RntkParams& params() const { return params_; }
  const ParameterSet& parameters() const { return weights_; }
  /// Direct access for in-place updates; shapes must be preserved.
  ParameterSet& mutable_parameters() { return weights_; }

  Eigen::VectorXd initial_state(int layer, const Sequence& x) const;

  ForwardPass forward(const Sequence& x) const;
  double output(const Sequence& x) const { return forward(x).output; }
  BackwardPass backward(const ForwardPass& pass) const;

  /// Materialized gradient of f(x) with respect to the raw weights.
  ParameterSet gradient(const Sequence& x) const;
  /// acc += scale * gradient, from cached passes.
  void accumulate_gradient(const ForwardPass& pass, const BackwardPass& back, double scale,
                           ParameterSet& acc) const;

  /// <grad f(x), grad f(x2)> per block, from cached passes.
  EmpiricalNtkResult ntk_from_passes(const ForwardPass& a, const BackwardPass& da, const ForwardPass& b,
                                     const BackwardPass& db) const;

 private:
  std::size_t copy_index(std::size_t t) const { return tied_ ? 0 : t; }
  void check_sequence(const Sequence& x) const;

  RntkParams params_;
  std::size_t width_;
  std::size_t input_dim_;
  std::uint64_t seed_;
  bool tied_;
  ParameterSet weights_;
};

/// Empirical NTK of one network at one pair.
EmpiricalNtkResult empirical_ntk(const FiniteRnn& rnn, const Sequence& x, const Sequence& x2);

/// Empirical NTK Gram matrix over a dataset.
Eigen::MatrixXd empirical_gram(const FiniteRnn& rnn, const std::vector<Sequence>& dataset);

struct DriftReport {
  std::size_t width = 0;
  std::size_t steps = 0;
  double lr = 0.0;
  /// 2 / (lambda_min + lambda_max) of the analytic RNTK Gram.
  double lr_bound = 0.0;
  /// sup_s |theta_s - theta_0| / sqrt(n)
  double param_drift = 0.0;
  /// sup_s of the spectral norm of the empirical Gram change.
  double gram_drift = 0.0;
  std::vector<double> loss;
};

/// Full-batch gradient descent on 0.5 * sum (f(x_i) - y_i)^2, starting from
/// the network's weights (the network itself is not modified). Throws
/// NumericError if the loss exceeds 1e6 or becomes non-finite.
DriftReport drift_experiment(const FiniteRnn& rnn, const std::vector<Sequence>& dataset,
                             const std::vector<double>& targets, double lr, std::size_t steps);

/// 2 / (lambda_min + lambda_max) of the analytic RNTK Gram over a dataset.
double stable_learning_rate(const RntkParams& params, const std::vector<Sequence>& dataset);

/// Width sweep of empirical against analytic kernels on random pairs.
struct ConvergenceConfig {
  std::vector<std::size_t> widths{64, 256, 1024, 4096};
  std::size_t pairs = 50;
  std::size_t length = 5;
  std::size_t input_dim = 1;
  bool untied = true;
  std::uint64_t seed = 0;
};

struct ConvergenceSample {
  std::size_t width = 0;
  std::size_t pair = 0;
  double analytic = 0.0;
  double tied = 0.0;
  /// NaN when the untied variant was not run.
  double untied = 0.0;
};

/// One fresh network per (width, pair); pairs are standard normal
/// sequences drawn from the "trials" substream.
std::vector<ConvergenceSample> convergence_samples(const RntkParams& params, const ConvergenceConfig& config);

/// The random pairs used by convergence_samples.
std::vector<std::pair<Sequence, Sequence>> convergence_pairs(const ConvergenceConfig& config);

struct ConvergenceRow {
  std::size_t width = 0;
  double median_rel_error_tied = 0.0;
  double median_rel_error_untied = 0.0;
};

std::vector<ConvergenceRow> summarize_convergence(const std::vector<ConvergenceSample>& samples);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct EnsembleEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Mean of f(x) f(x2) over `networks` independently initialized networks.
EnsembleEstimate output_product_ensemble(const RntkParams& params, std::size_t width, const Sequence& x,
                                         const Sequence& x2, std::size_t networks, std::uint64_t seed);

}  // namespace rntk
