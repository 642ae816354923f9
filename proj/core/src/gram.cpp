#include "rntk/gram.hpp"

#include "rntk/error.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

namespace rntk {

void GramMatrix::validate() const {
  if (values.rows() != values.cols()) {
    throw InputError("Gram matrix must be square");
  }
  if (!ids.empty() && ids.size() != size()) {
    throw InputError("Gram matrix has " + std::to_string(size()) + " rows but " +
                     std::to_string(ids.size()) + " ids");
  }
  if (!values.allFinite()) {
    throw NumericError("Gram matrix contains non-finite values");
  }
  const double scale = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  const double asymmetry = values.size() ? (values - values.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asymmetry > 1e-12 * scale) {
    throw InputError("Gram matrix is not symmetric");
  }
}

std::pair<double, double> GramMatrix::eigen_range() const {
  if (values.size() == 0) {
    throw InputError("empty Gram matrix has no eigenvalues");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(values, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigenvalue decomposition failed");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

void write_gram_csv(std::ostream& out, const GramMatrix& gram) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.values.cols(); ++j) {
      if (j) out << ',';
      out << gram.values(i, j);
    }
    out << '\n';
  }
}

void write_precomputed_kernel(std::ostream& out, const GramMatrix& gram) {
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < gram.values.rows(); ++i) {
    const auto row = static_cast<std::size_t>(i);
    const std::string label = row < gram.ids.size() && !gram.ids[row].empty() ? gram.ids[row] : "0";
    out << label << " 0:" << (i + 1);
    for (Eigen::Index j = 0; j < gram.values.cols(); ++j) {
      out << ' ' << (j + 1) << ':' << gram.values(i, j);
    }
    out << '\n';
  }
}

}  // namespace rntk
