#pragma once

#include "rntk/activation.hpp"
#include "rntk/gram.hpp"
#include "rntk/sequence.hpp"

#include <string>
#include <vector>

namespace rntk {

enum class BaselineKind { Rbf, Polynomial, MlpNtk };

/// How sequences of unequal length are compared.
enum class PaddingPolicy {
  /// Append zero steps at the tail up to the longest length.
  ZeroPadToMax,
  /// Throw InputError on unequal lengths.
  ErrorOnMismatch,
};

/// Non-recurrent reference kernels on flattened (time-major) sequences:
///   RBF         exp(-alpha |x - x'|^2)
///   Polynomial  (offset + <x, x'>)^degree
///   MlpNtk      NTK of a fully connected network of `depth` hidden layers
///               with readout scale 1
struct BaselineParams {
  BaselineKind kind = BaselineKind::Rbf;
  double alpha = 1.0;
  int degree = 2;
  double offset = 1.0;
  int depth = 1;
  double sigma_w = 1.4142135623730951;
  double sigma_b = 0.0;
  Activation activation = Activation::relu();
  PaddingPolicy padding = PaddingPolicy::ZeroPadToMax;

  void validate() const;
  std::string describe() const;
};

/// Kernel value for one pair. `pad_steps` is the common padded length; 0
/// means the longer of the two, and a nonzero value shorter than either
/// sequence throws InputError. Only the MLP NTK depends on it, through the
/// 1/d input scaling of its first layer.
double baseline_pair(const BaselineParams& params, const Sequence& x, const Sequence& x2,
                     std::size_t pad_steps = 0);

/// Gram matrix over a dataset, padded to `pad_steps` steps or, when that is
/// 0, to the dataset's longest sequence.
GramMatrix baseline_gram(const BaselineParams& params, const std::vector<Sequence>& dataset,
                         std::size_t pad_steps = 0);

/// rows x cols block, padded to `pad_steps` or to the longest sequence of
/// both sets. Pass the same padding as the training Gram when the block is
/// used for prediction.
Eigen::MatrixXd baseline_cross_gram(const BaselineParams& params, const std::vector<Sequence>& rows,
                                    const std::vector<Sequence>& cols, std::size_t pad_steps = 0);

/// MLP NTK of two flattened vectors of equal size.
double mlp_ntk(const BaselineParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& x2);

}  // namespace rntk
