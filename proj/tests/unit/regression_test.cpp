#include "rntk/error.hpp"
#include "rntk/regression.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace rntk;

namespace {

WindowConfig noiseless(std::size_t n_test) {
  WindowConfig c;
  c.noise_sigma = 0.0;
  c.t_var = 0;
  c.n_test = n_test;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(Regression, PreviousStepOnNoiselessSinusoidMatchesClosedForm) {
  const auto task = make_sinusoid_task(noiseless(200));
  const auto out = evaluate_regression(task, {{"pts", {}}}, {0.0}, 5, 0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_TRUE(std::isnan(out[0].lambda));
  // Each residual is sin(a k) - sin(a (k - 1)) with a = 2 pi / 1000.
  const double a = 2.0 * std::numbers::pi / 1000.0;
  double signal = 0.0;
  double error = 0.0;
  for (const auto& w : task.test) {
    const auto k = static_cast<double>(w.start + 10);
    signal += std::sin(a * k) * std::sin(a * k);
    const double r = 2.0 * std::sin(a / 2.0) * std::cos(a * (k - 0.5));
    error += r * r;
  }
  EXPECT_NEAR(out[0].snr_db, 10.0 * std::log10(signal / error), 1e-8);
}

TEST(Regression, ExactInterpolationReportsInfinity) {
  auto task = make_sinusoid_task(noiseless(0));
  task.test = task.train;
  RntkChoice choice;
  const auto out = evaluate_regression(task, {{"rntk", {choice}}}, {0.0}, 5, 0, 1e-9);
  EXPECT_TRUE(std::isinf(out[0].snr_db));
  EXPECT_EQ(out[0].lambda, 0.0);
}

TEST(Regression, FamiliesShareFoldsAndAreDeterministic) {
  WindowConfig c;
  c.n_test = 100;
  c.seed = 4;
  const auto task = make_sinusoid_task(c);
  std::vector<KernelChoice> rbf;
  for (double alpha : {0.1, 1.0}) {
    BaselineParams p;
    p.alpha = alpha;
    rbf.emplace_back(p);
  }
  const std::vector<KernelFamily> families{{"rntk", {RntkChoice{}}}, {"rbf", rbf}, {"pts", {}}};
  const auto a = evaluate_regression(task, families, {0.01, 0.1, 1.0}, 5, 7);
  const auto b = evaluate_regression(task, families, {0.01, 0.1, 1.0}, 5, 7);
  ASSERT_EQ(a.size(), 3u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, families[i].name);
    EXPECT_EQ(a[i].snr_db, b[i].snr_db);
    EXPECT_TRUE(std::isfinite(a[i].snr_db));
    EXPECT_FALSE(a[i].descriptor.empty());
  }
  EXPECT_LT(a[1].candidate, 2u);
}

TEST(Regression, CandidateGramsUseCommonPadding) {
  WindowConfig c;
  c.n_test = 5;
  const auto task = make_sinusoid_task(c);
  BaselineParams mlp;
  mlp.kind = BaselineKind::MlpNtk;
  const auto train = task.train_inputs();
  const auto g = candidate_gram(mlp, train, 25);
  const auto cross = candidate_cross(mlp, train, train, 25);
  EXPECT_TRUE(cross.isApprox(g.values, 1e-14));
  EXPECT_NE(describe(mlp).find("mlp"), std::string::npos);
}

TEST(Regression, StandardGrids) {
  EXPECT_EQ(standard_grid("rntk").size(), 15u * 12u * 5u);
  EXPECT_EQ(standard_grid("nngp").size(), 15u * 12u * 5u);
  EXPECT_EQ(standard_grid("mlp-ntk").size(), 10u * 6u * 9u);
  EXPECT_EQ(standard_grid("rbf").size(), 18u);
  EXPECT_EQ(standard_grid("poly").size(), 30u);
  EXPECT_TRUE(standard_grid("pts").empty());
  EXPECT_THROW(standard_grid("svm"), InputError);
  const auto lambdas = standard_lambdas();
  EXPECT_EQ(lambdas.front(), 0.0);
  EXPECT_EQ(lambdas.back(), 100.0);
  EXPECT_TRUE(std::is_sorted(lambdas.begin(), lambdas.end()));
  EXPECT_EQ(std::adjacent_find(lambdas.begin(), lambdas.end()), lambdas.end());
}

TEST(Regression, NeedsTestWindows) {
  const auto task = make_sinusoid_task(noiseless(0));
  EXPECT_THROW(evaluate_regression(task, {{"pts", {}}}, {0.0}, 5, 0), InputError);
}
