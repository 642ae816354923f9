#pragma once

#include "rntk/gram.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace rntk {

/// Kernel ridge coefficients; one column per output.
struct RidgeModel {
  Eigen::MatrixXd coefficients;
  double ridge_lambda = 0.0;
  std::vector<std::string> train_ids;
  /// Diagonal jitter added when lambda = 0 and K was not numerically
  /// positive definite; 0 when unused.
  double jitter = 0.0;

  Eigen::VectorXd alpha() const { return coefficients.col(0); }
};

/// Solves (K + lambda I) A = Y by Cholesky with one refinement step.
/// Throws NumericError (suggesting a larger lambda) when the reciprocal
/// condition estimate is below 1e-12 or the residual exceeds 1e-8 |Y|.
RidgeModel fit_ridge(const GramMatrix& gram, const Eigen::MatrixXd& targets, double lambda);
RidgeModel fit_ridge(const GramMatrix& gram, const Eigen::VectorXd& targets, double lambda);

/// cross (N_test x N_train) times the coefficients.
Eigen::MatrixXd predict_multi(const RidgeModel& model, const Eigen::MatrixXd& cross);
Eigen::VectorXd predict(const RidgeModel& model, const Eigen::MatrixXd& cross);

/// One-hot ridge regression with argmax decoding.
struct RidgeClassifier {
  RidgeModel model;
  std::vector<int> classes;
};

RidgeClassifier fit_classifier(const GramMatrix& gram, const std::vector<int>& labels, double lambda);
std::vector<int> classify(const RidgeClassifier& classifier, const Eigen::MatrixXd& cross);

struct CrossValidation {
  double best_lambda = 0.0;
  /// Mean squared held-out error per candidate; +inf where the solve failed.
  std::vector<double> mse;
};

/// Joint k-fold selection of a kernel candidate and a ridge lambda.
struct ModelSelection {
  std::size_t candidate = 0;
  double lambda = 0.0;
  double mse = 0.0;
  /// Held-out mean squared error, candidates x lambdas; +inf where the
  /// solve failed.
  Eigen::MatrixXd mse_table;
};

/// Every candidate Gram is scored on the same folds (drawn from `seed`);
/// the first minimum in (candidate, lambda) order wins.
ModelSelection select_model(const std::vector<GramMatrix>& candidates, const Eigen::VectorXd& targets,
                            const std::vector<double>& lambdas, std::size_t folds, std::uint64_t seed);

/// k-fold selection of lambda over `lambdas` (first minimum wins).
CrossValidation cross_validate_lambda(const GramMatrix& gram, const Eigen::VectorXd& targets,
                                      const std::vector<double>& lambdas, std::size_t folds, std::uint64_t seed);

/// 10 log10(|signal|^2 / |signal - prediction|^2). Returns +inf when the
/// residual norm is at most `zero_tolerance` * |signal| (exactly zero by
/// default).
double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& prediction, double zero_tolerance = 0.0);

/// Summary statistics of an accuracy table (rows are datasets, columns
/// models, entries in [0, 1]).
struct MetricsReport {
  std::vector<double> mean;
  std::vector<double> stddev;
  /// Fraction of datasets where a model reaches 90% (95%) of the best accuracy.
  std::vector<double> p90;
  std::vector<double> p95;
  /// Mean of accuracy / best accuracy.
  std::vector<double> pma;
  /// Mean rank, 1 = best, ties share the average rank.
  std::vector<double> friedman_rank;
};

MetricsReport summarize_metrics(const Eigen::MatrixXd& accuracy);

/// Ranks of one row, 1 = largest, ties averaged.
std::vector<double> average_ranks(const Eigen::VectorXd& row);

}  // namespace rntk
