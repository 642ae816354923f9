#include "rntk/learners.hpp"

#include "rntk/error.hpp"
#include "rntk/parallel.hpp"
#include "rntk/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace rntk {

namespace {

constexpr double kMaxCondition = 1e12;

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& kernel, const Eigen::MatrixXd& targets, double lambda,
                          double& jitter) {
  const Eigen::Index n = kernel.rows();
  Eigen::MatrixXd system = kernel;
  system.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(system);
  jitter = 0.0;
  if (llt.info() != Eigen::Success && lambda == 0.0) {
    jitter = 1e-10 * kernel.trace() / static_cast<double>(n);
    system.diagonal().array() += jitter;
    llt.compute(system);
  }
  if (llt.info() != Eigen::Success) {
    throw NumericError("kernel matrix is not positive definite; increase the ridge lambda");
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxCondition >= 1.0)) {
    throw NumericError("kernel system is ill conditioned (condition estimate " + std::to_string(1.0 / rcond) +
                       "); increase the ridge lambda");
  }
  Eigen::MatrixXd coeffs = llt.solve(targets);
  coeffs += llt.solve(targets - system * coeffs);
  const double residual = (system * coeffs - targets).norm();
  if (!(residual <= 1e-8 * targets.norm())) {
    throw NumericError("ridge solve residual " + std::to_string(residual) + " too large; increase the ridge lambda");
  }
  return coeffs;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RidgeModel fit_ridge(const GramMatrix& gram, const Eigen::MatrixXd& targets, double lambda) {
  gram.validate();
  if (gram.size() == 0) {
    throw InputError("cannot fit on an empty Gram matrix");
  }
  if (static_cast<std::size_t>(targets.rows()) != gram.size()) {
    throw InputError("target count " + std::to_string(targets.rows()) + " does not match Gram size " +
                     std::to_string(gram.size()));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InputError("ridge lambda must be nonnegative");
  }
  if (!targets.allFinite()) {
    throw InputError("targets must be finite");
  }
  RidgeModel model;
  model.ridge_lambda = lambda;
  model.train_ids = gram.ids;
  model.coefficients = solve_spd(gram.values, targets, lambda, model.jitter);
  return model;
}

RidgeModel fit_ridge(const GramMatrix& gram, const Eigen::VectorXd& targets, double lambda) {
  return fit_ridge(gram, Eigen::MatrixXd(targets), lambda);
}

Eigen::MatrixXd predict_multi(const RidgeModel& model, const Eigen::MatrixXd& cross) {
  if (cross.cols() != model.coefficients.rows()) {
    throw InputError("cross-kernel has " + std::to_string(cross.cols()) + " columns, model has " +
                     std::to_string(model.coefficients.rows()) + " training points");
  }
  return cross * model.coefficients;
}

Eigen::VectorXd predict(const RidgeModel& model, const Eigen::MatrixXd& cross) {
  return predict_multi(model, cross).col(0);
}

RidgeClassifier fit_classifier(const GramMatrix& gram, const std::vector<int>& labels, double lambda) {
  RidgeClassifier out;
  out.classes = labels;
  std::sort(out.classes.begin(), out.classes.end());
  out.classes.erase(std::unique(out.classes.begin(), out.classes.end()), out.classes.end());
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels.size()),
                                                 static_cast<Eigen::Index>(out.classes.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto pos = std::lower_bound(out.classes.begin(), out.classes.end(), labels[i]) - out.classes.begin();
    onehot(static_cast<Eigen::Index>(i), pos) = 1.0;
  }
  out.model = fit_ridge(gram, onehot, lambda);
  return out;
}

std::vector<int> classify(const RidgeClassifier& classifier, const Eigen::MatrixXd& cross) {
  const Eigen::MatrixXd scores = predict_multi(classifier.model, cross);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    out.push_back(classifier.classes[static_cast<std::size_t>(best)]);
  }
  return out;
}

ModelSelection select_model(const std::vector<GramMatrix>& candidates, const Eigen::VectorXd& targets,
                            const std::vector<double>& lambdas, std::size_t folds, std::uint64_t seed) {
  if (candidates.empty() || lambdas.empty()) {
    throw InputError("model selection needs at least one candidate and one lambda");
  }
  const std::size_t n = candidates.front().size();
  for (const auto& g : candidates) {
    if (g.size() != n) throw InputError("candidate Gram matrices differ in size");
  }
  if (folds < 2 || folds > n) {
    throw InputError("fold count must lie in [2, N]");
  }
  if (static_cast<std::size_t>(targets.size()) != n) {
    throw InputError("target count does not match Gram size");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::substream(seed, "folds");
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.uniform_int(0, i)]);
  }
  std::vector<std::vector<Eigen::Index>> train(folds);
  std::vector<std::vector<Eigen::Index>> held(folds);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t f = 0; f < folds; ++f) {
      (k % folds == f ? held[f] : train[f]).push_back(static_cast<Eigen::Index>(order[k]));
    }
  }

  ModelSelection out;
  out.mse_table.setZero(static_cast<Eigen::Index>(candidates.size()), static_cast<Eigen::Index>(lambdas.size()));
  parallel_for(candidates.size(), [&](std::size_t c) {
    for (std::size_t f = 0; f < folds; ++f) {
      GramMatrix sub;
      sub.values = candidates[c].values(train[f], train[f]);
      const Eigen::MatrixXd cross = candidates[c].values(held[f], train[f]);
      const Eigen::VectorXd y = targets(train[f]);
      const Eigen::VectorXd y_held = targets(held[f]);
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        double sse = std::numeric_limits<double>::infinity();
        try {
          sse = (predict(fit_ridge(sub, y, lambdas[k]), cross) - y_held).squaredNorm();
        } catch (const NumericError&) {
        }
        out.mse_table(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) += sse / static_cast<double>(n);
      }
    }
  });
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < out.mse_table.rows(); ++c) {
    for (Eigen::Index k = 0; k < out.mse_table.cols(); ++k) {
      if (out.mse_table(c, k) < best) {
        best = out.mse_table(c, k);
        out.candidate = static_cast<std::size_t>(c);
        out.lambda = lambdas[static_cast<std::size_t>(k)];
      }
    }
  }
  if (!std::isfinite(best)) {
    throw NumericError("every candidate failed to solve; try larger ridge lambdas");
  }
  out.mse = best;
  return out;
}

CrossValidation cross_validate_lambda(const GramMatrix& gram, const Eigen::VectorXd& targets,
                                      const std::vector<double>& lambdas, std::size_t folds, std::uint64_t seed) {
  const ModelSelection sel = select_model({gram}, targets, lambdas, folds, seed);
  CrossValidation out;
  out.best_lambda = sel.lambda;
  out.mse.assign(sel.mse_table.data(), sel.mse_table.data() + sel.mse_table.size());
  return out;
}

double snr_db(const Eigen::VectorXd& signal, const Eigen::VectorXd& prediction, double zero_tolerance) {
  if (signal.size() != prediction.size() || signal.size() == 0) {
    throw InputError("SNR needs nonempty vectors of equal length");
  }
  const double residual = (signal - prediction).squaredNorm();
  if (residual <= zero_tolerance * zero_tolerance * signal.squaredNorm()) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(signal.squaredNorm() / residual);
}

std::vector<double> average_ranks(const Eigen::VectorXd& row) {
  const auto m = static_cast<std::size_t>(row.size());
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return row(static_cast<Eigen::Index>(a)) > row(static_cast<Eigen::Index>(b));
  });
  std::vector<double> ranks(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && row(static_cast<Eigen::Index>(order[j + 1])) == row(static_cast<Eigen::Index>(order[i]))) ++j;
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

MetricsReport summarize_metrics(const Eigen::MatrixXd& accuracy) {
  if (accuracy.rows() == 0 || accuracy.cols() == 0) {
    throw InputError("accuracy table is empty");
  }
  if (!accuracy.allFinite() || accuracy.minCoeff() < 0.0 || accuracy.maxCoeff() > 1.0) {
    throw InputError("accuracies must lie in [0, 1]");
  }
  const auto datasets = static_cast<std::size_t>(accuracy.rows());
  const auto models = static_cast<std::size_t>(accuracy.cols());
  MetricsReport out;
  out.p90.assign(models, 0.0);
  out.p95.assign(models, 0.0);
  out.pma.assign(models, 0.0);
  out.friedman_rank.assign(models, 0.0);
  for (std::size_t i = 0; i < datasets; ++i) {
    const Eigen::VectorXd row = accuracy.row(static_cast<Eigen::Index>(i)).transpose();
    const double best = row.maxCoeff();
    if (!(best > 0.0)) {
      throw InputError("dataset " + std::to_string(i + 1) + " has zero accuracy for every model");
    }
    const auto ranks = average_ranks(row);
    for (std::size_t j = 0; j < models; ++j) {
      const double y = row(static_cast<Eigen::Index>(j));
      out.p90[j] += y >= 0.9 * best ? 1.0 : 0.0;
      out.p95[j] += y >= 0.95 * best ? 1.0 : 0.0;
      out.pma[j] += y / best;
      out.friedman_rank[j] += ranks[j];
    }
  }
  const double count = static_cast<double>(datasets);
  for (std::size_t j = 0; j < models; ++j) {
    out.p90[j] /= count;
    out.p95[j] /= count;
    out.pma[j] /= count;
    out.friedman_rank[j] /= count;
    std::vector<double> column(accuracy.col(static_cast<Eigen::Index>(j)).data(),
                               accuracy.col(static_cast<Eigen::Index>(j)).data() + datasets);
    const double mu = mean_of(column);
    double var = 0.0;
    for (double y : column) var += (y - mu) * (y - mu);
    out.mean.push_back(mu);
    out.stddev.push_back(datasets > 1 ? std::sqrt(var / (count - 1.0)) : 0.0);
  }
  return out;
}

}  // namespace rntk
