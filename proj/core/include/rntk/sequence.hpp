#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rntk {

/// One multivariate time series: row t holds the observation x_t.
class Sequence {
 public:
  Sequence() = default;
  /// Throws InputError unless data has at least one row and one column and
  /// every entry is finite.
  explicit Sequence(Eigen::MatrixXd data, std::string id = {});

  /// Univariate convenience constructor (m = 1).
  static Sequence from_values(const std::vector<double>& values, std::string id = {});

  std::size_t length() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(data_.cols()); }
  const Eigen::MatrixXd& data() const { return data_; }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  auto step(std::size_t t) const { return data_.row(static_cast<Eigen::Index>(t)); }

  /// Time-major concatenation of all steps, length T*m.
  Eigen::VectorXd flattened() const;

  /// Content hash of the data (ids ignored). Equal sequences hash equally;
  /// -0.0 and +0.0 are treated as the same value.
  std::uint64_t content_hash() const;

  /// Element-wise equality of the data; ids are ignored.
  friend bool operator==(const Sequence& a, const Sequence& b);

 private:
  Eigen::MatrixXd data_;
  std::string id_;
};

/// Throws InputError if the sequences do not share the input dimension.
void require_same_dim(const Sequence& a, const Sequence& b);
void require_same_dim(const std::vector<Sequence>& dataset);

}  // namespace rntk
