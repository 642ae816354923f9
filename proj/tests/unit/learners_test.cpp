#include "rntk/error.hpp"
#include "rntk/kernel.hpp"
#include "rntk/learners.hpp"
#include "rntk/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace rntk;

namespace {

GramMatrix make_gram(const Eigen::MatrixXd& values) {
  GramMatrix g;
  g.values = values;
  for (Eigen::Index i = 0; i < values.rows(); ++i) g.ids.push_back(std::to_string(i + 1));
  return g;
}

GramMatrix random_rntk_gram(std::size_t count, std::uint64_t seed, std::vector<Sequence>* data_out = nullptr) {
  Rng rng(seed);
  std::vector<Sequence> data;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> v(2 + rng.uniform_int(0, 4));
    for (auto& e : v) e = rng.normal();
    data.push_back(Sequence::from_values(v));
  }
  if (data_out) *data_out = data;
  return gram(RntkParams{}, data, KernelKind::Theta);
}

}  // namespace

TEST(Ridge, SinglePointScalarFormula) {
  Eigen::MatrixXd k(1, 1);
  k << 2.5;
  Eigen::VectorXd y(1);
  y << 3.0;
  const auto model = fit_ridge(make_gram(k), y, 0.5);
  const auto pred = predict(model, k);
  EXPECT_NEAR(pred(0), 2.5 * 3.0 / (2.5 + 0.5), 1e-14);
  EXPECT_EQ(model.ridge_lambda, 0.5);
}

TEST(Ridge, InterpolatesWithZeroLambda) {
  const auto g = random_rntk_gram(12, 1);
  Rng rng(2);
  Eigen::VectorXd y(12);
  for (auto& v : y) v = rng.normal();
  const auto model = fit_ridge(g, y, 0.0);
  EXPECT_LT((predict(model, g.values) - y).cwiseAbs().maxCoeff(), 1e-6);
  // A training row of the Gram recovers its own target.
  EXPECT_NEAR(predict(model, g.values.row(4))(0), y(4), 1e-6);
}

TEST(Ridge, ZeroCrossGivesZeroPrediction) {
  const auto g = random_rntk_gram(5, 3);
  const auto model = fit_ridge(g, Eigen::VectorXd(Eigen::VectorXd::Ones(5)), 0.1);
  EXPECT_TRUE(predict(model, Eigen::MatrixXd::Zero(3, 5)).isZero());
}

TEST(Ridge, MultiOutputMatchesColumnwise) {
  const auto g = random_rntk_gram(8, 4);
  Rng rng(5);
  Eigen::MatrixXd y(8, 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  const auto joint = fit_ridge(g, y, 0.01);
  const auto first = fit_ridge(g, Eigen::VectorXd(y.col(0)), 0.01);
  EXPECT_LT((joint.coefficients.col(0) - first.alpha()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(predict_multi(joint, g.values).cols(), 2);
}

TEST(Ridge, SingularSystems) {
  Eigen::MatrixXd k(2, 2);
  k << 1, 1, 1, 1;
  Eigen::VectorXd y(2);
  y << 1, -1;
  // Rank deficient with lambda = 0: a small diagonal jitter is recorded.
  EXPECT_GT(fit_ridge(make_gram(k), y, 0.0).jitter, 0.0);
  EXPECT_EQ(fit_ridge(make_gram(k), y, 0.1).jitter, 0.0);
  EXPECT_THROW(fit_ridge(make_gram(Eigen::MatrixXd::Zero(2, 2)), y, 0.0), NumericError);
  Eigen::MatrixXd near(2, 2);
  near << 1, 1 - 1e-15, 1 - 1e-15, 1;
  EXPECT_THROW(fit_ridge(make_gram(near), y, 1e-16), NumericError);
}

TEST(Ridge, InputErrors) {
  const auto g = make_gram(Eigen::MatrixXd::Identity(2, 2));
  EXPECT_THROW(fit_ridge(g, Eigen::VectorXd(Eigen::VectorXd::Ones(3)), 0.1), InputError);
  EXPECT_THROW(fit_ridge(g, Eigen::VectorXd(Eigen::VectorXd::Ones(2)), -1.0), InputError);
  Eigen::VectorXd bad(2);
  bad << 1.0, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(fit_ridge(g, bad, 0.1), InputError);
  const auto model = fit_ridge(g, Eigen::VectorXd(Eigen::VectorXd::Ones(2)), 0.1);
  EXPECT_THROW(predict(model, Eigen::MatrixXd::Zero(1, 3)), InputError);
}

TEST(Classifier, RecoversTrainingLabels) {
  std::vector<Sequence> data;
  const auto g = random_rntk_gram(10, 6, &data);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const auto clf = fit_classifier(g, labels, 1e-6);
  EXPECT_EQ(clf.classes, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(classify(clf, g.values), labels);
}

TEST(ModelSelection, PicksInformativeKernelAndIsDeterministic) {
  std::vector<Sequence> data;
  const auto good = random_rntk_gram(20, 7, &data);
  Eigen::VectorXd y(20);
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = data[i].data().sum();
  const auto noise = make_gram(Eigen::MatrixXd::Identity(20, 20));
  const std::vector<double> lambdas{0.0, 0.01, 0.1, 1.0};
  const auto sel = select_model({noise, good}, y, lambdas, 5, 11);
  EXPECT_EQ(sel.candidate, 1u);
  EXPECT_EQ(sel.mse_table.rows(), 2);
  EXPECT_EQ(sel.mse_table.cols(), 4);
  EXPECT_EQ(sel.mse, sel.mse_table.minCoeff());
  const auto again = select_model({noise, good}, y, lambdas, 5, 11);
  EXPECT_EQ(sel.lambda, again.lambda);
  EXPECT_TRUE(sel.mse_table == again.mse_table);

  const auto cv = cross_validate_lambda(good, y, lambdas, 5, 11);
  EXPECT_EQ(cv.mse.size(), 4u);
  EXPECT_EQ(cv.best_lambda, sel.lambda);
  EXPECT_THROW(select_model({good}, y, lambdas, 1, 0), InputError);
  EXPECT_THROW(select_model({good}, y, {}, 5, 0), InputError);
}

TEST(Snr, DefinitionAndExactFit) {
  Eigen::VectorXd s(2), p(2);
  s << 1, 1;
  p << 1, 0;
  EXPECT_NEAR(snr_db(s, p), 10.0 * std::log10(2.0), 1e-14);
  EXPECT_TRUE(std::isinf(snr_db(s, s)));
  Eigen::VectorXd close = s;
  close(0) += 1e-12;
  EXPECT_FALSE(std::isinf(snr_db(s, close)));
  EXPECT_TRUE(std::isinf(snr_db(s, close, 1e-9)));
  EXPECT_THROW(snr_db(s, Eigen::VectorXd::Zero(3)), InputError);
}

TEST(Metrics, SingleModel) {
  Eigen::MatrixXd acc(3, 1);
  acc << 0.5, 0.9, 0.2;
  const auto r = summarize_metrics(acc);
  EXPECT_EQ(r.p90[0], 1.0);
  EXPECT_EQ(r.p95[0], 1.0);
  EXPECT_EQ(r.pma[0], 1.0);
  EXPECT_EQ(r.friedman_rank[0], 1.0);
}

TEST(Metrics, TwoModelTie) {
  Eigen::MatrixXd acc(2, 2);
  acc << 0.9, 0.8, 0.7, 0.9;
  const auto r = summarize_metrics(acc);
  EXPECT_EQ(r.friedman_rank, (std::vector<double>{1.5, 1.5}));
}

TEST(Metrics, HandComputedThreeModelTable) {
  Eigen::MatrixXd acc(3, 3);
  acc << 0.80, 0.70, 0.60,
         0.50, 0.50, 0.48,
         0.60, 0.90, 0.84;
  const auto r = summarize_metrics(acc);
  for (int j = 0; j < 3; ++j) EXPECT_NEAR(r.p90[j], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.p95[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.p95[1], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.p95[2], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.pma[0], 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.pma[1], 2.875 / 3.0, 1e-15);
  EXPECT_NEAR(r.pma[2], (0.75 + 0.96 + 0.84 / 0.9) / 3.0, 1e-15);
  EXPECT_NEAR(r.friedman_rank[0], 5.5 / 3.0, 1e-15);
  EXPECT_NEAR(r.friedman_rank[1], 1.5, 1e-15);
  EXPECT_NEAR(r.friedman_rank[2], 8.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.mean[0], 1.9 / 3.0, 1e-15);
  EXPECT_NEAR(r.stddev[1], 0.2, 1e-14);
}

TEST(Metrics, AverageRanksAndErrors) {
  Eigen::VectorXd row(4);
  row << 0.5, 0.9, 0.5, 0.1;
  EXPECT_EQ(average_ranks(row), (std::vector<double>{2.5, 1.0, 2.5, 4.0}));
  Eigen::MatrixXd bad(1, 2);
  bad << 0.5, 1.5;
  EXPECT_THROW(summarize_metrics(bad), InputError);
  EXPECT_THROW(summarize_metrics(Eigen::MatrixXd(0, 0)), InputError);
}
