#include "rntk/regression.hpp"

#include "rntk/error.hpp"
#include "rntk/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rntk {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

GramMatrix candidate_gram(const KernelChoice& choice, const std::vector<Sequence>& data, std::size_t pad_steps) {
  return std::visit(overloaded{[&](const RntkChoice& c) { return gram(c.params, data, c.kind); },
                               [&](const BaselineParams& b) { return baseline_gram(b, data, pad_steps); }},
                    choice);
}

Eigen::MatrixXd candidate_cross(const KernelChoice& choice, const std::vector<Sequence>& rows,
                                const std::vector<Sequence>& cols, std::size_t pad_steps) {
  return std::visit(overloaded{[&](const RntkChoice& c) { return cross_gram(c.params, rows, cols, c.kind); },
                               [&](const BaselineParams& b) { return baseline_cross_gram(b, rows, cols, pad_steps); }},
                    choice);
}

std::string describe(const KernelChoice& choice) {
  return std::visit(overloaded{[](const RntkChoice& c) {
                                 return std::string(c.kind == KernelKind::Theta ? "rntk " : "nngp ") +
                                        c.params.describe();
                               },
                               [](const BaselineParams& b) { return b.describe(); }},
                    choice);
}

std::vector<RegressionOutcome> evaluate_regression(const WindowedRegressionTask& task,
                                                   const std::vector<KernelFamily>& families,
                                                   const std::vector<double>& lambdas, std::size_t folds,
                                                   std::uint64_t seed, double exact_tolerance) {
  const auto train = task.train_inputs();
  const auto test = task.test_inputs();
  if (test.empty()) {
    throw InputError("regression needs at least one test window");
  }
  const Eigen::VectorXd y = task.train_targets();
  const Eigen::VectorXd truth = task.test_targets();
  std::size_t pad = 0;
  for (const auto& s : train) pad = std::max(pad, s.length());
  for (const auto& s : test) pad = std::max(pad, s.length());

  std::vector<RegressionOutcome> out;
  for (const auto& family : families) {
    RegressionOutcome result;
    result.name = family.name;
    Eigen::VectorXd prediction;
    if (family.candidates.empty()) {
      prediction = task.test_last_values();
      result.lambda = std::numeric_limits<double>::quiet_NaN();
      result.descriptor = "previous time step";
    } else {
      std::vector<GramMatrix> grams;
      grams.reserve(family.candidates.size());
      for (const auto& choice : family.candidates) grams.push_back(candidate_gram(choice, train, pad));
      const ModelSelection sel = select_model(grams, y, lambdas, std::min(folds, train.size()), seed);
      const KernelChoice& chosen = family.candidates[sel.candidate];
      const RidgeModel model = fit_ridge(grams[sel.candidate], y, sel.lambda);
      prediction = predict(model, candidate_cross(chosen, test, train, pad));
      result.lambda = sel.lambda;
      result.candidate = sel.candidate;
      result.descriptor = describe(chosen);
    }
    result.snr_db = snr_db(truth, prediction, exact_tolerance);
    out.push_back(std::move(result));
  }
  return out;
}

std::vector<KernelChoice> standard_grid(const std::string& family, PaddingPolicy padding) {
  std::vector<KernelChoice> out;
  if (family == "rntk" || family == "nngp") {
    const std::vector<double> sigma_w{1.34, 1.35, 1.36, 1.37, 1.38, 1.39, 1.40, 1.41,
                                      1.42, std::sqrt(2.0), 1.43, 1.44, 1.45, 1.46, 1.47};
    const std::vector<double> sigma_b{0, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9, 1, 2};
    const std::vector<double> sigma_h{0, 0.01, 0.1, 0.5, 1};
    for (double w : sigma_w) {
      for (double b : sigma_b) {
        for (double h : sigma_h) {
          RntkChoice c;
          c.params.sigma_w = w;
          c.params.sigma_u = 1.0;
          c.params.sigma_b = b;
          c.params.sigma_h = h;
          c.kind = family == "rntk" ? KernelKind::Theta : KernelKind::Nngp;
          out.emplace_back(c);
        }
      }
    }
  } else if (family == "mlp-ntk") {
    for (int depth = 1; depth <= 10; ++depth) {
      for (double w : {0.5, 1.0, std::sqrt(2.0), 2.0, 2.5, 3.0}) {
        for (double b : {0.0, 0.01, 0.1, 0.2, 0.5, 0.8, 1.0, 2.0, 5.0}) {
          BaselineParams p;
          p.kind = BaselineKind::MlpNtk;
          p.depth = depth;
          p.sigma_w = w;
          p.sigma_b = b;
          p.padding = padding;
          out.emplace_back(p);
        }
      }
    }
  } else if (family == "rbf") {
    for (double a : {0.01, 0.05, 0.1, 0.2, 0.5, 0.6, 0.7, 0.8, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 20.0, 30.0, 40.0, 100.0}) {
      BaselineParams p;
      p.kind = BaselineKind::Rbf;
      p.alpha = a;
      p.padding = padding;
      out.emplace_back(p);
    }
  } else if (family == "poly") {
    for (int d = 1; d <= 5; ++d) {
      for (double r : {0.0, 0.1, 0.2, 0.5, 1.0, 2.0}) {
        BaselineParams p;
        p.kind = BaselineKind::Polynomial;
        p.degree = d;
        p.offset = r;
        p.padding = padding;
        out.emplace_back(p);
      }
    }
  } else if (family != "pts") {
    throw InputError("unknown kernel family '" + family + "'");
  }
  return out;
}

std::vector<double> standard_lambdas() {
  return {0, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1, 2, 3, 4, 5, 6, 7, 8, 10, 100};
}

}  // namespace rntk
