// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "rntk/error.hpp"
#include "rntk/finite_rnn.hpp"
#include "rntk/kernel.hpp"
#include "rntk/learners.hpp"
#include "rntk/random.hpp"
#include "rntk/regression.hpp"
#include "rntk/sensitivity.hpp"
#include "rntk/vphi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rntk;

namespace {

constexpr std::uint64_t kSeed = 20190527;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

Sequence random_sequence(Rng& rng, std::size_t length, std::size_t dim = 1) {
  Eigen::MatrixXd d(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(dim));
  rng.fill_normal(std::span<double>(d.data(), static_cast<std::size_t>(d.size())));
  return Sequence(d);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// 1. Closed-form Gaussian expectations against direct sampling.
Outcome criterion_1() {
  const std::size_t samples = 1000000;
  Rng rng = Rng::substream(kSeed, "criterion-1");
  std::vector<double> u(2 * samples);
  rng.fill_normal(u);
  const auto relu = Activation::relu();
  const auto erf = Activation::erf();
  double worst = 0.0;
  std::string where;
  for (int i = 0; i < 20; ++i) {
    const double c = -1.0 + 2.0 * i / 19.0;
    const double k1 = 0.5 + 0.035 * i;
    const double k2 = 1.2 - 0.03 * i;
    const BivariateCov k{k1, k2, c * std::sqrt(k1 * k2)};
    const double a = std::sqrt(k1);
    const double b = k.k3 / a;
    const double d = std::sqrt(std::max(0.0, k2 - b * b));
    double sums[4] = {0, 0, 0, 0};
    for (std::size_t s = 0; s < samples; ++s) {
      const double z1 = a * u[2 * s];
      const double z2 = b * u[2 * s] + d * u[2 * s + 1];
      sums[0] += relu.value(z1) * relu.value(z2);
      sums[1] += relu.derivative(z1) * relu.derivative(z2);
      sums[2] += erf.value(z1) * erf.value(z2);
      sums[3] += erf.derivative(z1) * erf.derivative(z2);
    }
    const double exact[4] = {vphi(relu, k), vphi_prime(relu, k), vphi(erf, k), vphi_prime(erf, k)};
    const char* names[4] = {"relu V", "relu V'", "erf V", "erf V'"};
    for (int j = 0; j < 4; ++j) {
      const double err = std::abs(sums[j] / static_cast<double>(samples) - exact[j]);
      if (err > worst) {
        worst = err;
        where = std::string(names[j]) + " at c=" + fmt(c);
      }
    }
  }
  return {worst <= 5e-3, "20 matrices, 1e6 samples, max abs error " + fmt(worst) + " (" + where + "), tol 5e-3"};
}

// 2 and 3 share one width sweep.
std::vector<ConvergenceSample> sweep;

const std::vector<ConvergenceSample>& convergence_sweep() {
  if (sweep.empty()) {
    ConvergenceConfig config;
    config.seed = kSeed;
    sweep = convergence_samples(RntkParams{}, config);
  }
  return sweep;
}

Outcome criterion_2() {
  const auto rows = summarize_convergence(convergence_sweep());
  std::vector<double> widths, tied, untied;
  for (const auto& r : rows) {
    widths.push_back(static_cast<double>(r.width));
    tied.push_back(r.median_rel_error_tied);
    untied.push_back(r.median_rel_error_untied);
  }
  const double slope_tied = loglog_slope(widths, tied);
  const double slope_untied = loglog_slope(widths, untied);
  const bool pass = strictly_decreasing(tied) && strictly_decreasing(untied) && std::abs(slope_tied + 0.5) <= 0.2 &&
                    std::abs(slope_untied + 0.5) <= 0.2;
  return {pass, "widths " + list(widths) + ", median rel error tied " + list(tied) + " slope " + fmt(slope_tied) +
                    ", untied " + list(untied) + " slope " + fmt(slope_untied)};
}

std::pair<double, double> bootstrap_median_ci(const std::vector<double>& values, std::uint64_t seed) {
  const std::size_t resamples = 4000;
  Rng rng = Rng::substream(kSeed, "bootstrap", {seed});
  std::vector<double> medians;
  std::vector<double> draw(values.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (auto& d : draw) d = values[rng.uniform_int(0, values.size() - 1)];
    medians.push_back(median(draw));
  }
  std::sort(medians.begin(), medians.end());
  return {medians[static_cast<std::size_t>(0.025 * resamples)], medians[static_cast<std::size_t>(0.975 * resamples) - 1]};
}

Outcome criterion_3() {
  // Medians of empirical / analytic over the pairs at the largest width; the
  // analytic kernel corresponds to the ratio 1.
  std::vector<double> tied, untied;
  for (const auto& s : convergence_sweep()) {
    if (s.width != 4096) continue;
    tied.push_back(s.tied / s.analytic);
    untied.push_back(s.untied / s.analytic);
  }
  const auto ct = bootstrap_median_ci(tied, 0);
  const auto cu = bootstrap_median_ci(untied, 1);
  const bool overlap = std::max(ct.first, cu.first) <= std::min(ct.second, cu.second);
  const bool tied_has_1 = ct.first <= 1.0 && 1.0 <= ct.second;
  const bool untied_has_1 = cu.first <= 1.0 && 1.0 <= cu.second;
  return {tied.size() == 50 && overlap && tied_has_1 && untied_has_1,
          "n=4096, 95% bootstrap CI of median empirical/analytic: tied [" + fmt(ct.first, 6) + ", " +
              fmt(ct.second, 6) + "], untied [" + fmt(cu.first, 6) + ", " + fmt(cu.second, 6) + "]"};
}

// 4. Explicit gradients against central differences.
double fd_block_error(const FiniteRnn& rnn, const Sequence& x, ParamBlock block, std::size_t layer,
                      std::uint64_t stream) {
  const ParameterSet& w0 = rnn.parameters();
  ParameterSet d = w0.zeros_like();
  Rng rng = Rng::substream(kSeed, "criterion-4", {stream});
  auto fill = [&](auto& m) { rng.fill_normal(std::span<double>(m.data(), static_cast<std::size_t>(m.size()))); };
  if (block == ParamBlock::v) {
    fill(d.v);
  } else {
    for (std::size_t c = 0; c < d.W[layer].size(); ++c) {
      if (block == ParamBlock::W) fill(d.W[layer][c]);
      if (block == ParamBlock::U) fill(d.U[layer][c]);
      if (block == ParamBlock::b) fill(d.b[layer][c]);
    }
  }
  const double h = 1e-4;
  auto at = [&](double step) {
    ParameterSet w = w0;
    w.axpy(step, d);
    return FiniteRnn(rnn.params(), rnn.input_dim(), rnn.seed(), w, rnn.tied()).output(x);
  };
  const double fd = (at(h) - at(-h)) / (2.0 * h);
  const double analytic = rnn.gradient(x).dot(d);
  return std::abs(fd - analytic) / std::abs(analytic);
}

Outcome criterion_4() {
  RntkParams p;
  p.sigma_w = 1.1;
  p.sigma_u = 0.9;
  p.sigma_b = 0.3;
  p.sigma_h = 0.4;
  p.sigma_v = 1.2;
  p.activation = Activation::erf();
  Rng rng = Rng::substream(kSeed, "criterion-4-inputs");
  double worst = 0.0;
  std::string where;
  std::uint64_t stream = 0;
  for (int depth : {1, 2}) {
    p.depth = depth;
    for (bool tied : {true, false}) {
      const auto x = random_sequence(rng, 4, 2);
      const FiniteRnn rnn(p, 16, 2, Rng::derive(kSeed, "init", {static_cast<std::uint64_t>(depth), tied}), tied, 4);
      for (std::size_t l = 0; l < static_cast<std::size_t>(depth); ++l) {
        for (auto block : {ParamBlock::W, ParamBlock::U, ParamBlock::b}) {
          const double e = fd_block_error(rnn, x, block, l, ++stream);
          if (e > worst) {
            worst = e;
            where = "layer " + std::to_string(l + 1) + " block " + "WUb"[static_cast<int>(block)];
          }
        }
      }
      const double e = fd_block_error(rnn, x, ParamBlock::v, 0, ++stream);
      if (e > worst) {
        worst = e;
        where = "readout";
      }
    }
  }
  return {worst < 1e-5, "erf, n=16, step 1e-4, tied and untied, depth 1-2: max relative error " + fmt(worst) + " (" +
                            where + "), tol 1e-5"};
}

// 5. Drift under gradient descent shrinks with width.
Outcome criterion_5() {
  RntkParams p;
  std::vector<Sequence> data;
  std::vector<double> targets;
  for (std::uint64_t i = 0; i < 4; ++i) {
    Rng rng = Rng::substream(kSeed, "trials", {i});
    data.push_back(random_sequence(rng, 3));
  }
  Rng target_rng = Rng::substream(kSeed, "targets");
  for (int i = 0; i < 4; ++i) targets.push_back(target_rng.normal());
  const double bound = stable_learning_rate(p, data);
  const double lr = 0.5 * bound;
  const std::size_t networks = 4;
  std::vector<double> param, gram;
  for (std::size_t width : {64u, 256u, 1024u}) {
    double pd = 0.0;
    double gd = 0.0;
    for (std::size_t k = 0; k < networks; ++k) {
      const FiniteRnn rnn(p, width, 1, Rng::derive(kSeed, "init", {width, k}));
      const auto report = drift_experiment(rnn, data, targets, lr, 200);
      pd += report.param_drift;
      gd += report.gram_drift;
    }
    param.push_back(pd / networks);
    gram.push_back(gd / networks);
  }
  return {lr < bound && strictly_decreasing(param) && strictly_decreasing(gram),
          "widths [64, 256, 1024], lr " + fmt(lr) + " (bound " + fmt(bound) + "), 200 steps, 4 networks: param drift " +
              list(param) + ", gram drift " + list(gram)};
}

// 6. Shape of the per-step sensitivity profile.
Outcome criterion_6() {
  SensitivityConfig config;
  config.length = 100;
  config.trials = 1000;
  config.seed = kSeed;
  auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin()) + 1;
  };
  RntkParams base;
  const auto flat = sensitivity_profile(base, config).normalized;
  RntkParams p = base;
  p.sigma_w = 1.5;
  const auto early = sensitivity_profile(p, config).normalized;
  p.sigma_w = 1.3;
  const auto late = sensitivity_profile(p, config).normalized;
  p = base;
  p.sigma_h = 0.5;
  const auto with_state = sensitivity_profile(p, config).normalized;

  const double min_flat = *std::min_element(flat.begin(), flat.end());
  const std::size_t t_early = argmax(early);
  const std::size_t t_late = argmax(late);
  const bool pass = min_flat > 0.5 && t_early >= 1 && t_early <= 10 && t_late >= 91 && t_late <= 100 &&
                    with_state[0] < flat[0];
  return {pass, "T=100, 1000 trials: min normalized " + fmt(min_flat) + " (> 0.5); argmax sigma_w=1.5 at t=" +
                    std::to_string(t_early) + " (1-10); argmax sigma_w=1.3 at t=" + std::to_string(t_late) +
                    " (91-100); s(1) with sigma_h=0.5 " + fmt(with_state[0]) + " vs " + fmt(flat[0])};
}

// 7. Next-step regression on the noisy sinusoid.
Outcome criterion_7() {
  const std::size_t repeats = 100;
  std::vector<KernelFamily> families;
  for (const char* name : {"rntk", "rbf", "mlp-ntk", "pts"}) families.push_back({name, standard_grid(name)});
  double sums[4] = {0, 0, 0, 0};
  for (std::size_t r = 0; r < repeats; ++r) {
    WindowConfig task_config;
    task_config.t_fixed = 10;
    task_config.t_var = 10;
    task_config.n_train = 20;
    task_config.noise_sigma = 0.05;
    task_config.seed = Rng::derive(kSeed, "windows", {r});
    const auto task = make_sinusoid_task(task_config);
    const auto outcomes = evaluate_regression(task, families, standard_lambdas(), 5, Rng::derive(kSeed, "folds", {r}));
    for (std::size_t i = 0; i < outcomes.size(); ++i) sums[i] += outcomes[i].snr_db;
  }
  double mean[4];
  for (int i = 0; i < 4; ++i) mean[i] = sums[i] / repeats;
  return {mean[0] > mean[1] && mean[0] > mean[2],
          "T_var=10, 100 repeats, mean SNR dB: rntk " + fmt(mean[0]) + ", rbf " + fmt(mean[1]) + ", mlp-ntk " +
              fmt(mean[2]) + ", previous step " + fmt(mean[3])};
}

// 8. Gram matrices over variable-length data are valid kernels.
Outcome criterion_8() {
  Rng rng = Rng::substream(kSeed, "criterion-8");
  std::vector<Sequence> data;
  for (int i = 0; i < 30; ++i) data.push_back(random_sequence(rng, 1 + rng.uniform_int(0, 19)));
  RntkParams erf2;
  erf2.sigma_w = 1.2;
  erf2.sigma_b = 0.3;
  erf2.sigma_h = 0.5;
  erf2.depth = 2;
  erf2.activation = Activation::erf();
  bool pass = true;
  std::string detail;
  const std::vector<std::pair<std::string, RntkParams>> settings{{"relu", RntkParams{}}, {"erf depth 2", erf2}};
  for (const auto& [name, p] : settings) {
    const auto g = gram(p, data, KernelKind::Theta);
    const auto [lo, hi] = g.eigen_range();
    double worst_cs = 0.0;
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j)
        if (i != j) worst_cs = std::max(worst_cs, g.values(i, j) * g.values(i, j) / (g.values(i, i) * g.values(j, j)));
    pass = pass && lo >= -1e-8 * hi && worst_cs <= 1.0 + 1e-12;
    detail += "; " + name + ": lambda min " +
              fmt(lo) + ", lambda max " + fmt(hi) + ", max off-diagonal K_ij^2/(K_ii K_jj) " + fmt(worst_cs, 15);
  }
  return {pass, "30 sequences, lengths 1-20" + detail};
}

// 9. Summary metrics on hand-ranked accuracy tables.
Outcome criterion_9() {
  auto near = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (std::abs(a[i] - b[i]) > 1e-12) return false;
    return true;
  };
  bool pass = true;
  Eigen::MatrixXd single(2, 1);
  single << 0.4, 0.7;
  const auto s = summarize_metrics(single);
  pass = pass && near(s.p90, {1}) && near(s.p95, {1}) && near(s.pma, {1}) && near(s.friedman_rank, {1});

  Eigen::MatrixXd two(2, 2);
  two << 0.9, 0.8, 0.7, 0.9;
  const auto t = summarize_metrics(two);
  pass = pass && near(t.friedman_rank, {1.5, 1.5}) && near(t.p90, {0.5, 0.5}) && near(t.p95, {0.5, 0.5}) &&
         near(t.pma, {(1.0 + 0.7 / 0.9) / 2.0, (0.8 / 0.9 + 1.0) / 2.0});

  Eigen::MatrixXd three(3, 3);
  three << 0.80, 0.70, 0.60, 0.50, 0.50, 0.48, 0.60, 0.90, 0.84;
  const auto r = summarize_metrics(three);
  pass = pass && near(r.p90, {2.0 / 3, 2.0 / 3, 2.0 / 3}) && near(r.p95, {2.0 / 3, 2.0 / 3, 1.0 / 3}) &&
         near(r.pma, {8.0 / 9, 2.875 / 3, (0.75 + 0.96 + 0.84 / 0.9) / 3}) &&
         near(r.friedman_rank, {5.5 / 3, 1.5, 8.0 / 3});
  return {pass, "three toy tables (1, 2 and 3 models): P90/P95/PMA/Friedman ranks " +
                    std::string(pass ? "match" : "differ from") + " hand values; 3-model ranks " +
                    list(r.friedman_rank)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  // Criteria 2 and 3 share one sweep, whose cost is charged to 2.
  const std::vector<Criterion> criteria{
      {1, 60, criterion_1},  {2, 600, criterion_2}, {3, 600, criterion_3},
      {4, 600, criterion_4}, {5, 300, criterion_5}, {6, 600, criterion_6},
      {7, 900, criterion_7}, {8, 600, criterion_8}, {9, 600, criterion_9},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << " - " << o.detail << " ["
              << fmt(seconds, 3) << " s" << (in_time ? "" : ", over the " + fmt(c.budget_seconds) + " s budget")
              << "]" << std::endl;
  }
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
