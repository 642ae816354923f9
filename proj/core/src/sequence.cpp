#include "rntk/sequence.hpp"

#include "rntk/error.hpp"
#include "rntk/random.hpp"

#include <bit>
#include <cstring>

namespace rntk {

Sequence::Sequence(Eigen::MatrixXd data, std::string id) : data_(std::move(data)), id_(std::move(id)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw InputError("sequence must have at least one step and one input dimension");
  }
  if (!data_.allFinite()) {
    throw InputError("sequence '" + id_ + "' contains non-finite values");
  }
}

Sequence Sequence::from_values(const std::vector<double>& values, std::string id) {
  Eigen::MatrixXd data(static_cast<Eigen::Index>(values.size()), 1);
  for (std::size_t t = 0; t < values.size(); ++t) {
    data(static_cast<Eigen::Index>(t), 0) = values[t];
  }
  return Sequence(std::move(data), std::move(id));
}

Eigen::VectorXd Sequence::flattened() const {
  Eigen::VectorXd flat(data_.size());
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < data_.rows(); ++t) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      flat(k++) = data_(t, j);
    }
  }
  return flat;
}

std::uint64_t Sequence::content_hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(data_.rows()));
  h = mix64(h ^ static_cast<std::uint64_t>(data_.cols()));
  for (Eigen::Index t = 0; t < data_.rows(); ++t) {
    for (Eigen::Index j = 0; j < data_.cols(); ++j) {
      const double value = data_(t, j) == 0.0 ? 0.0 : data_(t, j);
      h = mix64(h ^ std::bit_cast<std::uint64_t>(value));
    }
  }
  return h;
}

bool operator==(const Sequence& a, const Sequence& b) {
  return a.data_.rows() == b.data_.rows() && a.data_.cols() == b.data_.cols() &&
         (a.data_.array() == b.data_.array()).all();
}

void require_same_dim(const Sequence& a, const Sequence& b) {
  if (a.dim() != b.dim()) {
    throw InputError("input dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
}

void require_same_dim(const std::vector<Sequence>& dataset) {
  for (std::size_t i = 1; i < dataset.size(); ++i) {
    require_same_dim(dataset.front(), dataset[i]);
  }
}

}  // namespace rntk
