#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <vector>

namespace rntk {

/// Labeled symmetric kernel matrix over a dataset.
struct GramMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> ids;
  /// Kernel kind and hyperparameters that produced the values.
  std::string kernel_descriptor;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }

  /// Throws InputError unless square, matching ids, finite and symmetric
  /// to 1e-12 (relative to the largest magnitude).
  void validate() const;

  /// Smallest and largest eigenvalues (self-adjoint solver).
  std::pair<double, double> eigen_range() const;
};

/// Comma-separated values, one row per line, full precision.
void write_gram_csv(std::ostream& out, const GramMatrix& gram);

/// Precomputed-kernel interchange format (LIBSVM `-t 4`): one row per
/// sample, `<label> 0:<row> 1:<k(x,x_1)> 2:<k(x,x_2)> ...`, where row and
/// column serial numbers start at 1. Labels are taken from `ids`.
void write_precomputed_kernel(std::ostream& out, const GramMatrix& gram);

}  // namespace rntk
