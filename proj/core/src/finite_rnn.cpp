#include "rntk/finite_rnn.hpp"

#include "rntk/error.hpp"
#include "rntk/parallel.hpp"
#include "rntk/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace rntk {

namespace {

// Visits matching blocks of two parameter sets (either may be const).
template <typename A, typename B, typename Fn>
void for_each_block(A& a, B& b, Fn&& fn) {
  for (std::size_t l = 0; l < a.W.size(); ++l) {
    for (std::size_t c = 0; c < a.W[l].size(); ++c) {
      fn(ParamBlock::W, a.W[l][c], b.W[l][c]);
      fn(ParamBlock::U, a.U[l][c], b.U[l][c]);
      fn(ParamBlock::b, a.b[l][c], b.b[l][c]);
    }
  }
  fn(ParamBlock::v, a.v, b.v);
}

void fill_normal(Rng rng, double* data, Eigen::Index size) {
  rng.fill_normal(std::span<double>(data, static_cast<std::size_t>(size)));
}

Eigen::MatrixXd apply(const Activation& act, const Eigen::MatrixXd& g, bool derivative) {
  if (act.kind() == ActivationKind::ReLU) {
    if (derivative) return (g.array() > 0.0).cast<double>().matrix();
    return g.cwiseMax(0.0);
  }
  if (derivative) {
    return g.unaryExpr([&](double z) { return act.derivative(z); });
  }
  return g.unaryExpr([&](double z) { return act.value(z); });
}

double median(std::vector<double> values) {
  if (values.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double upper = values[mid];
  if (values.size() % 2 == 1) {
    return upper;
  }
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out = *this;
  for_each_block(out, *this, [](ParamBlock, auto& x, const auto&) { x.setZero(); });
  return out;
}

ParameterSet ParameterSet::restricted(ParamBlock block) const {
  ParameterSet out = *this;
  for_each_block(out, *this, [block](ParamBlock k, auto& x, const auto&) {
    if (k != block) x.setZero();
  });
  return out;
}

void ParameterSet::axpy(double a, const ParameterSet& other) {
  for_each_block(*this, other, [a](ParamBlock, auto& x, const auto& y) { x += a * y; });
}

double ParameterSet::dot(const ParameterSet& other) const {
  double sum = 0.0;
  for_each_block(*this, other, [&](ParamBlock, const auto& x, const auto& y) {
    sum += (x.array() * y.array()).sum();
  });
  return sum;
}

double ParameterSet::block_dot(const ParameterSet& other, ParamBlock block) const {
  double sum = 0.0;
  for_each_block(*this, other, [&](ParamBlock k, const auto& x, const auto& y) {
    if (k == block) sum += (x.array() * y.array()).sum();
  });
  return sum;
}

FiniteRnn::FiniteRnn(RntkParams params, std::size_t width, std::size_t input_dim, std::uint64_t seed, bool tied,
                     std::size_t steps)
    : params_(std::move(params)), width_(width), input_dim_(input_dim), seed_(seed), tied_(tied) {
  params_.validate();
  if (width_ < 1 || input_dim_ < 1) {
    throw InputError("network width and input dimension must be positive");
  }
  if (!tied_ && steps < 1) {
    throw InputError("an untied network needs the number of time steps");
  }
  const auto n = static_cast<Eigen::Index>(width_);
  const std::size_t copies = tied_ ? 1 : steps;
  const auto layers = static_cast<std::size_t>(params_.depth);
  weights_.W.assign(layers, {});
  weights_.U.assign(layers, {});
  weights_.b.assign(layers, {});
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = l == 0 ? static_cast<Eigen::Index>(input_dim_) : n;
    for (std::size_t c = 0; c < copies; ++c) {
      Eigen::MatrixXd w(n, n);
      Eigen::MatrixXd u(n, in);
      Eigen::VectorXd b(n);
      fill_normal(Rng::substream(seed_, "init", {l, c, 0}), w.data(), w.size());
      fill_normal(Rng::substream(seed_, "init", {l, c, 1}), u.data(), u.size());
      fill_normal(Rng::substream(seed_, "init", {l, c, 2}), b.data(), b.size());
      weights_.W[l].push_back(std::move(w));
      weights_.U[l].push_back(std::move(u));
      weights_.b[l].push_back(std::move(b));
    }
  }
  weights_.v.resize(n);
  fill_normal(Rng::substream(seed_, "init", {layers, 0, 3}), weights_.v.data(), n);
}

FiniteRnn::FiniteRnn(RntkParams params, std::size_t input_dim, std::uint64_t seed, ParameterSet weights, bool tied)
    : params_(std::move(params)), width_(static_cast<std::size_t>(weights.v.size())), input_dim_(input_dim),
      seed_(seed), tied_(tied), weights_(std::move(weights)) {
  params_.validate();
  const auto layers = static_cast<std::size_t>(params_.depth);
  const auto n = static_cast<Eigen::Index>(width_);
  if (width_ < 1 || weights_.W.size() != layers || weights_.U.size() != layers || weights_.b.size() != layers) {
    throw InputError("weights do not match the network depth");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t copies = weights_.W[l].size();
    if (copies < 1 || weights_.U[l].size() != copies || weights_.b[l].size() != copies || (tied_ && copies != 1)) {
      throw InputError("inconsistent number of weight copies");
    }
    const Eigen::Index in = l == 0 ? static_cast<Eigen::Index>(input_dim_) : n;
    for (std::size_t c = 0; c < copies; ++c) {
      if (weights_.W[l][c].rows() != n || weights_.W[l][c].cols() != n || weights_.U[l][c].rows() != n ||
          weights_.U[l][c].cols() != in || weights_.b[l][c].size() != n) {
        throw InputError("weight shapes do not match the network width");
      }
    }
  }
}

void FiniteRnn::check_sequence(const Sequence& x) const {
  if (x.dim() != input_dim_) {
    throw InputError("sequence dimension " + std::to_string(x.dim()) + " does not match network input dimension " +
                     std::to_string(input_dim_));
  }
  if (!tied_ && x.length() > weights_.W.front().size()) {
    throw InputError("sequence is longer than the untied network");
  }
}

Eigen::VectorXd FiniteRnn::initial_state(int layer, const Sequence& x) const {
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width_));
  if (params_.sigma_h > 0.0) {
    fill_normal(Rng::substream(seed_, "h0", {x.content_hash(), static_cast<std::uint64_t>(layer)}), h.data(),
                h.size());
    h *= params_.sigma_h;
  }
  return h;
}

ForwardPass FiniteRnn::forward(const Sequence& x) const {
  check_sequence(x);
  const auto n = static_cast<Eigen::Index>(width_);
  const auto steps = static_cast<Eigen::Index>(x.length());
  const double root_n = std::sqrt(static_cast<double>(width_));
  ForwardPass pass;
  pass.x = x.data().transpose();
  for (int l = 0; l < params_.depth; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const LayerSigmas s = params_.layer(l);
    const double scale_w = s.sigma_w / root_n;
    const double scale_u = s.sigma_u / (l == 0 ? std::sqrt(static_cast<double>(input_dim_)) : root_n);
    const Eigen::MatrixXd in = l == 0 ? pass.x : Eigen::MatrixXd(pass.h[li - 1].rightCols(steps));

    Eigen::MatrixXd g(n, steps);
    Eigen::MatrixXd h(n, steps + 1);
    h.col(0) = initial_state(l, x);
    if (tied_) {
      g.noalias() = scale_u * weights_.U[li][0] * in;
      g.colwise() += s.sigma_b * weights_.b[li][0];
    }
    for (Eigen::Index t = 0; t < steps; ++t) {
      const std::size_t c = copy_index(static_cast<std::size_t>(t));
      if (!tied_) {
        g.col(t).noalias() = scale_u * weights_.U[li][c] * in.col(t);
        g.col(t) += s.sigma_b * weights_.b[li][c];
      }
      g.col(t).noalias() += scale_w * weights_.W[li][c] * h.col(t);
      h.col(t + 1) = apply(params_.activation, g.col(t), false);
    }
    pass.g.push_back(std::move(g));
    pass.h.push_back(std::move(h));
  }
  pass.output = params_.sigma_v / root_n * weights_.v.dot(pass.h.back().col(steps));
  return pass;
}

BackwardPass FiniteRnn::backward(const ForwardPass& pass) const {
  const auto n = static_cast<Eigen::Index>(width_);
  const Eigen::Index steps = pass.g.front().cols();
  const double root_n = std::sqrt(static_cast<double>(width_));
  const int top = params_.depth - 1;
  BackwardPass back;
  back.delta.assign(static_cast<std::size_t>(params_.depth), Eigen::MatrixXd(n, steps));
  for (int l = top; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const double scale_w = params_.layer(l).sigma_w / root_n;
    const double scale_up = l < top ? params_.layer(l + 1).sigma_u / root_n : 0.0;
    const Eigen::MatrixXd slope = apply(params_.activation, pass.g[li], true);
    auto& delta = back.delta[li];
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
      if (l == top && t == steps - 1) {
        acc += params_.sigma_v / root_n * weights_.v;
      }
      if (t + 1 < steps) {
        acc.noalias() += scale_w * weights_.W[li][copy_index(static_cast<std::size_t>(t + 1))].transpose() *
                         delta.col(t + 1);
      }
      if (l < top) {
        acc.noalias() += scale_up * weights_.U[li + 1][copy_index(static_cast<std::size_t>(t))].transpose() *
                         back.delta[li + 1].col(t);
      }
      delta.col(t) = slope.col(t).cwiseProduct(acc);
    }
  }
  return back;
}

void FiniteRnn::accumulate_gradient(const ForwardPass& pass, const BackwardPass& back, double scale,
                                    ParameterSet& acc) const {
  const Eigen::Index steps = pass.g.front().cols();
  const double root_n = std::sqrt(static_cast<double>(width_));
  for (int l = 0; l < params_.depth; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const LayerSigmas s = params_.layer(l);
    const double scale_w = scale * s.sigma_w / root_n;
    const double scale_u = scale * s.sigma_u / (l == 0 ? std::sqrt(static_cast<double>(input_dim_)) : root_n);
    const auto& delta = back.delta[li];
    const Eigen::MatrixXd in = l == 0 ? pass.x : Eigen::MatrixXd(pass.h[li - 1].rightCols(steps));
    if (tied_) {
      acc.W[li][0].noalias() += scale_w * delta * pass.h[li].leftCols(steps).transpose();
      acc.U[li][0].noalias() += scale_u * delta * in.transpose();
      acc.b[li][0] += scale * s.sigma_b * delta.rowwise().sum();
      continue;
    }
    for (Eigen::Index t = 0; t < steps; ++t) {
      const std::size_t c = copy_index(static_cast<std::size_t>(t));
      acc.W[li][c].noalias() += scale_w * delta.col(t) * pass.h[li].col(t).transpose();
      acc.U[li][c].noalias() += scale_u * delta.col(t) * in.col(t).transpose();
      acc.b[li][c] += scale * s.sigma_b * delta.col(t);
    }
  }
  acc.v += scale * params_.sigma_v / root_n * pass.h.back().col(steps);
}

ParameterSet FiniteRnn::gradient(const Sequence& x) const {
  const ForwardPass pass = forward(x);
  const BackwardPass back = backward(pass);
  ParameterSet grad = weights_.zeros_like();
  accumulate_gradient(pass, back, 1.0, grad);
  return grad;
}

EmpiricalNtkResult FiniteRnn::ntk_from_passes(const ForwardPass& a, const BackwardPass& da, const ForwardPass& b,
                                              const BackwardPass& db) const {
  const Eigen::Index ta = a.g.front().cols();
  const Eigen::Index tb = b.g.front().cols();
  const double n = static_cast<double>(width_);
  // Sum over (t, t2) of ee(t, t2) * other(t, t2); untied weights only pair equal steps.
  auto contract = [&](const Eigen::MatrixXd& ee, const Eigen::MatrixXd& other) {
    if (tied_) {
      return (ee.array() * other.array()).sum();
    }
    const Eigen::Index k = std::min(ta, tb);
    return (ee.diagonal().head(k).array() * other.diagonal().head(k).array()).sum();
  };

  EmpiricalNtkResult out;
  out.width = width_;
  out.seed = seed_;
  for (int l = 0; l < params_.depth; ++l) {
    const auto li = static_cast<std::size_t>(l);
    const LayerSigmas s = params_.layer(l);
    const Eigen::MatrixXd ee = da.delta[li].transpose() * db.delta[li];
    const Eigen::MatrixXd hh = a.h[li].leftCols(ta).transpose() * b.h[li].leftCols(tb);
    Eigen::MatrixXd ii;
    double u_scale = s.sigma_u * s.sigma_u;
    if (l == 0) {
      ii = a.x.transpose() * b.x;
      u_scale /= static_cast<double>(input_dim_);
    } else {
      ii = a.h[li - 1].rightCols(ta).transpose() * b.h[li - 1].rightCols(tb);
      u_scale /= n;
    }
    out.w += s.sigma_w * s.sigma_w / n * contract(ee, hh);
    out.u += u_scale * contract(ee, ii);
    out.b += s.sigma_b * s.sigma_b * contract(ee, Eigen::MatrixXd::Ones(ta, tb));
  }
  out.v = params_.sigma_v * params_.sigma_v / n * a.h.back().col(ta).dot(b.h.back().col(tb));
  out.value = out.w + out.u + out.b + out.v;
  return out;
}

EmpiricalNtkResult empirical_ntk(const FiniteRnn& rnn, const Sequence& x, const Sequence& x2) {
  const ForwardPass a = rnn.forward(x);
  const ForwardPass b = rnn.forward(x2);
  return rnn.ntk_from_passes(a, rnn.backward(a), b, rnn.backward(b));
}

namespace {

Eigen::MatrixXd gram_from_passes(const FiniteRnn& rnn, const std::vector<ForwardPass>& passes,
                                 const std::vector<BackwardPass>& backs) {
  const auto n = static_cast<Eigen::Index>(passes.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const auto a = static_cast<std::size_t>(i);
      const auto b = static_cast<std::size_t>(j);
      out(i, j) = rnn.ntk_from_passes(passes[a], backs[a], passes[b], backs[b]).value;
      out(j, i) = out(i, j);
    }
  }
  return out;
}

}  // namespace

Eigen::MatrixXd empirical_gram(const FiniteRnn& rnn, const std::vector<Sequence>& dataset) {
  std::vector<ForwardPass> passes;
  std::vector<BackwardPass> backs;
  for (const auto& x : dataset) {
    passes.push_back(rnn.forward(x));
    backs.push_back(rnn.backward(passes.back()));
  }
  return gram_from_passes(rnn, passes, backs);
}

double stable_learning_rate(const RntkParams& params, const std::vector<Sequence>& dataset) {
  const auto [lo, hi] = gram(params, dataset, KernelKind::Theta).eigen_range();
  return 2.0 / (lo + hi);
}

DriftReport drift_experiment(const FiniteRnn& rnn, const std::vector<Sequence>& dataset,
                             const std::vector<double>& targets, double lr, std::size_t steps) {
  if (dataset.empty() || dataset.size() != targets.size()) {
    throw InputError("drift experiment needs one target per sequence");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw InputError("learning rate must be positive");
  }
  DriftReport report;
  report.width = rnn.width();
  report.steps = steps;
  report.lr = lr;
  report.lr_bound = stable_learning_rate(rnn.params(), dataset);

  FiniteRnn net = rnn;
  const ParameterSet theta0 = net.parameters();
  const double root_n = std::sqrt(static_cast<double>(net.width()));
  Eigen::MatrixXd gram0;
  for (std::size_t s = 0;; ++s) {
    std::vector<ForwardPass> passes;
    std::vector<BackwardPass> backs;
    double loss = 0.0;
    for (const auto& x : dataset) {
      passes.push_back(net.forward(x));
      backs.push_back(net.backward(passes.back()));
    }
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      const double r = passes[i].output - targets[i];
      loss += 0.5 * r * r;
    }
    report.loss.push_back(loss);
    if (!std::isfinite(loss) || loss > 1e6) {
      throw NumericError("gradient descent diverged at step " + std::to_string(s) + " (lr " + std::to_string(lr) +
                         "); keep lr below 2/(lambda_min+lambda_max) = " + std::to_string(report.lr_bound));
    }

    const Eigen::MatrixXd g = gram_from_passes(net, passes, backs);
    if (s == 0) {
      gram0 = g;
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g - gram0, Eigen::EigenvaluesOnly);
      report.gram_drift = std::max(report.gram_drift, solver.eigenvalues().cwiseAbs().maxCoeff());
      ParameterSet diff = net.parameters();
      diff.axpy(-1.0, theta0);
      report.param_drift = std::max(report.param_drift, std::sqrt(diff.squared_norm()) / root_n);
    }
    if (s == steps) {
      break;
    }

    ParameterSet grad = theta0.zeros_like();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      net.accumulate_gradient(passes[i], backs[i], passes[i].output - targets[i], grad);
    }
    net.mutable_parameters().axpy(-lr, grad);
  }
  return report;
}

std::vector<std::pair<Sequence, Sequence>> convergence_pairs(const ConvergenceConfig& config) {
  if (config.length < 1 || config.input_dim < 1 || config.pairs < 1) {
    throw InputError("convergence sweep needs positive length, dimension and pair count");
  }
  std::vector<std::pair<Sequence, Sequence>> out;
  const auto rows = static_cast<Eigen::Index>(config.length);
  const auto cols = static_cast<Eigen::Index>(config.input_dim);
  for (std::size_t p = 0; p < config.pairs; ++p) {
    Rng rng = Rng::substream(config.seed, "trials", {p});
    Eigen::MatrixXd a(rows, cols);
    Eigen::MatrixXd b(rows, cols);
    rng.fill_normal(std::span<double>(a.data(), static_cast<std::size_t>(a.size())));
    rng.fill_normal(std::span<double>(b.data(), static_cast<std::size_t>(b.size())));
    out.emplace_back(Sequence(std::move(a), "p" + std::to_string(p) + "a"),
                     Sequence(std::move(b), "p" + std::to_string(p) + "b"));
  }
  return out;
}

std::vector<ConvergenceSample> convergence_samples(const RntkParams& params, const ConvergenceConfig& config) {
  const auto pairs = convergence_pairs(config);
  std::vector<double> analytic(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    analytic[p] = rntk_pair(params, pairs[p].first, pairs[p].second).theta;
  }

  std::vector<ConvergenceSample> out;
  for (std::size_t width : config.widths) {
    std::vector<ConvergenceSample> rows(pairs.size());
    auto run = [&](std::size_t p) {
      ConvergenceSample& row = rows[p];
      row.width = width;
      row.pair = p;
      row.analytic = analytic[p];
      {
        const FiniteRnn tied(params, width, config.input_dim, Rng::derive(config.seed, "init", {width, p, 0}));
        row.tied = empirical_ntk(tied, pairs[p].first, pairs[p].second).value;
      }
      row.untied = std::numeric_limits<double>::quiet_NaN();
      if (config.untied) {
        const FiniteRnn untied(params, width, config.input_dim, Rng::derive(config.seed, "init", {width, p, 1}),
                               false, config.length);
        row.untied = empirical_ntk(untied, pairs[p].first, pairs[p].second).value;
      }
    };
    // Untied networks at large width hold T full weight copies; keep the
    // concurrent footprint bounded.
    const double bytes = 8.0 * static_cast<double>(width) * static_cast<double>(width) *
                         static_cast<double>(config.untied ? config.length + 1 : 1) *
                         static_cast<double>(params.depth) * static_cast<double>(worker_count());
    if (bytes > 2e9) {
      for (std::size_t p = 0; p < pairs.size(); ++p) run(p);
    } else {
      parallel_for(pairs.size(), run);
    }
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

std::vector<ConvergenceRow> summarize_convergence(const std::vector<ConvergenceSample>& samples) {
  std::vector<std::size_t> order;
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> errors;
  for (const auto& s : samples) {
    if (!errors.count(s.width)) order.push_back(s.width);
    auto& [tied, untied] = errors[s.width];
    tied.push_back(std::abs(s.tied - s.analytic) / std::abs(s.analytic));
    if (!std::isnan(s.untied)) untied.push_back(std::abs(s.untied - s.analytic) / std::abs(s.analytic));
  }
  std::vector<ConvergenceRow> out;
  for (std::size_t width : order) {
    const auto& [tied, untied] = errors[width];
    out.push_back({width, median(tied), median(untied)});
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("slope fit needs at least two points");
  }
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("log-log fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

EnsembleEstimate output_product_ensemble(const RntkParams& params, std::size_t width, const Sequence& x,
                                         const Sequence& x2, std::size_t networks, std::uint64_t seed) {
  if (networks < 2) {
    throw InputError("an ensemble needs at least two networks");
  }
  require_same_dim(x, x2);
  std::vector<double> products(networks);
  parallel_for(networks, [&](std::size_t k) {
    const FiniteRnn rnn(params, width, x.dim(), Rng::derive(seed, "init", {width, k}));
    products[k] = rnn.output(x) * rnn.output(x2);
  });
  const double count = static_cast<double>(networks);
  double mean = 0.0;
  for (double p : products) mean += p;
  mean /= count;
  double var = 0.0;
  for (double p : products) var += (p - mean) * (p - mean);
  var /= count - 1.0;
  return {mean, std::sqrt(var / count)};
}

}  // namespace rntk
