#pragma once

#include "rntk/activation.hpp"
#include "rntk/gram.hpp"
#include "rntk/sequence.hpp"
#include "rntk/vphi.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace rntk {

struct LayerSigmas {
  double sigma_w = 0.0;
  double sigma_u = 0.0;
  double sigma_b = 0.0;
};

/// Hyperparameters of the recurrent kernel and of the matching finite
/// network. All sigmas are standard deviations.
struct RntkParams {
  double sigma_w = 1.4142135623730951;
  double sigma_u = 1.0;
  double sigma_b = 0.0;
  double sigma_h = 0.0;
  double sigma_v = 1.0;
  int depth = 1;
  Activation activation = Activation::relu();
  /// Per-layer (sigma_w, sigma_u, sigma_b); when set, must have `depth`
  /// entries and replaces the shared values.
  std::optional<std::vector<LayerSigmas>> per_layer;

  /// Throws InputError when an invariant is violated.
  void validate() const;
  /// Sigmas of layer `layer` (0-based).
  LayerSigmas layer(int layer) const;
  /// Human-readable summary, used as a provenance string.
  std::string describe() const;
};

/// Diagonal forward kernels Sigma^{(l,t,t)}(x, x) of one sequence, indexed
/// (layer, step), both 0-based. Reused across all pairs involving x.
struct SelfKernel {
  Eigen::MatrixXd diag;
};

SelfKernel self_kernel(const RntkParams& params, const Sequence& x);

/// Forward GP kernels for one sequence pair on the full time grid.
///
/// Indices are 0-based: sigma(l, t, t2) is the covariance of the layer-l
/// pre-activations of x at step t and of x2 at step t2.
class KernelTable {
 public:
  KernelTable(int layers, std::size_t length, std::size_t length2);

  int layers() const { return static_cast<int>(sigma_.size()); }
  std::size_t length() const { return length_; }
  std::size_t length2() const { return length2_; }

  double sigma(int layer, std::size_t t, std::size_t t2) const;
  double& sigma(int layer, std::size_t t, std::size_t t2);
  double self_x(int layer, std::size_t t) const { return self_x_.diag(layer, static_cast<Eigen::Index>(t)); }
  double self_x2(int layer, std::size_t t2) const { return self_x2_.diag(layer, static_cast<Eigen::Index>(t2)); }

  /// The 2x2 covariance [[S(x,x), S(x,x2)], [S(x,x2), S(x2,x2)]] of the
  /// layer-l pre-activations at steps (t, t2).
  BivariateCov cov(int layer, std::size_t t, std::size_t t2) const;

  SelfKernel& self_x_table() { return self_x_; }
  SelfKernel& self_x2_table() { return self_x2_; }

 private:
  std::size_t length_;
  std::size_t length2_;
  std::vector<Eigen::MatrixXd> sigma_;
  SelfKernel self_x_;
  SelfKernel self_x2_;
};

/// Fills the forward table for every layer and every (t, t2).
/// Throws InputError on an input-dimension mismatch.
KernelTable forward_table(const RntkParams& params, const Sequence& x, const Sequence& x2);

/// Backward kernels Pi^{(l,t,t+offset)} on the single nonzero band.
struct PiBand {
  std::size_t offset = 0;
  /// values(l, t) for layer l and step t of the shorter sequence.
  Eigen::MatrixXd values;
};

/// Requires table.length() <= table.length2(); length and length2 must match
/// the table. Entries off the band are zero and are not stored.
PiBand backward_table(const RntkParams& params, const KernelTable& table,
                      std::size_t length, std::size_t length2);

struct KernelOutput {
  double theta = 0.0;
  double nngp = 0.0;
  /// Pi values along the band, layer-major, when requested.
  std::vector<double> pi_trace;
};

/// Recurrent NTK and NNGP kernel for one pair. Only the band t2 - t = T2 - T
/// of the forward grid contributes, so this evaluates that band alone in
/// O(L * max(T, T2)). The pair is put in a canonical order before
/// evaluation, which makes the result exactly symmetric.
KernelOutput rntk_pair(const RntkParams& params, const Sequence& x, const Sequence& x2,
                       bool keep_trace = false);

/// Same, with precomputed self kernels of both sequences.
KernelOutput rntk_pair(const RntkParams& params, const Sequence& x, const Sequence& x2,
                       const SelfKernel& self_x, const SelfKernel& self_x2,
                       bool keep_trace = false);

/// Reference evaluation through forward_table/backward_table on the full
/// grid. Same result as rntk_pair at O(L * T * T2) cost.
KernelOutput rntk_pair_full(const RntkParams& params, const Sequence& x, const Sequence& x2);

enum class KernelKind { Theta, Nngp };

/// Symmetric kernel matrix over a dataset. Each unordered pair is evaluated
/// once; the diagonal goes through the same code path as the off-diagonal.
GramMatrix gram(const RntkParams& params, const std::vector<Sequence>& dataset, KernelKind kind);

/// rows x cols block of kernel values, e.g. test-versus-train.
Eigen::MatrixXd cross_gram(const RntkParams& params, const std::vector<Sequence>& rows,
                           const std::vector<Sequence>& cols, KernelKind kind);

}  // namespace rntk
