#include "rntk/kernel.hpp"

#include "rntk/error.hpp"
#include "rntk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rntk {

namespace {

struct Coeffs {
  double w2;
  double u2;
  double b2;
};

std::vector<Coeffs> layer_coeffs(const RntkParams& params) {
  std::vector<Coeffs> out;
  out.reserve(static_cast<std::size_t>(params.depth));
  for (int l = 0; l < params.depth; ++l) {
    const LayerSigmas s = params.layer(l);
    out.push_back({s.sigma_w * s.sigma_w, s.sigma_u * s.sigma_u, s.sigma_b * s.sigma_b});
  }
  return out;
}

void check_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InputError(std::string(name) + " must be positive and finite");
  }
}

void check_nonnegative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InputError(std::string(name) + " must be nonnegative and finite");
  }
}

double input_dot(const Sequence& x, std::size_t t, const Sequence& x2, std::size_t t2) {
  return x.step(t).dot(x2.step(t2)) / static_cast<double>(x.dim());
}

// Puts the shorter sequence first; equal lengths are ordered by content so
// that (x, x2) and (x2, x) evaluate identically.
bool should_swap(const Sequence& x, const Sequence& x2) {
  if (x.length() != x2.length()) {
    return x.length() > x2.length();
  }
  const auto& a = x.data();
  const auto& b = x2.data();
  for (Eigen::Index t = 0; t < a.rows(); ++t) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (a(t, j) != b(t, j)) {
        return b(t, j) < a(t, j);
      }
    }
  }
  return false;
}

// Pi band and theta from any source of band covariances and band sigmas.
template <typename CovFn, typename SigmaFn>
KernelOutput assemble(const RntkParams& params, const std::vector<Coeffs>& coeffs,
                      std::size_t length, CovFn&& cov, SigmaFn&& sigma, bool keep_trace,
                      Eigen::MatrixXd* pi_out = nullptr) {
  const int layers = params.depth;
  const auto last = static_cast<Eigen::Index>(length) - 1;
  const double v2 = params.sigma_v * params.sigma_v;
  Eigen::MatrixXd pi(layers, static_cast<Eigen::Index>(length));

  const int top = layers - 1;
  pi(top, last) = v2 * vphi_prime(params.activation, cov(top, last));
  for (Eigen::Index t = last - 1; t >= 0; --t) {
    pi(top, t) = coeffs[top].w2 * vphi_prime(params.activation, cov(top, t)) * pi(top, t + 1);
  }
  for (int l = top - 1; l >= 0; --l) {
    const double up = coeffs[static_cast<std::size_t>(l + 1)].u2;
    pi(l, last) = up * vphi_prime(params.activation, cov(l, last)) * pi(l + 1, last);
    for (Eigen::Index t = last - 1; t >= 0; --t) {
      pi(l, t) = vphi_prime(params.activation, cov(l, t)) *
                 (coeffs[static_cast<std::size_t>(l)].w2 * pi(l, t + 1) + up * pi(l + 1, t));
    }
  }

  KernelOutput out;
  out.nngp = v2 * vphi(params.activation, cov(top, last));
  double theta = 0.0;
  for (int l = 0; l < layers; ++l) {
    for (Eigen::Index t = 0; t <= last; ++t) {
      theta += pi(l, t) * sigma(l, t);
    }
  }
  out.theta = theta + out.nngp;
  if (!std::isfinite(out.theta) || !std::isfinite(out.nngp)) {
    throw NumericError("kernel value is not finite");
  }
  if (keep_trace) {
    out.pi_trace.reserve(static_cast<std::size_t>(pi.size()));
    for (int l = 0; l < layers; ++l) {
      for (Eigen::Index t = 0; t <= last; ++t) {
        out.pi_trace.push_back(pi(l, t));
      }
    }
  }
  if (pi_out) {
    *pi_out = std::move(pi);
  }
  return out;
}

KernelOutput band_pair(const RntkParams& params, const Sequence& x, const Sequence& x2,
                       const SelfKernel& dx, const SelfKernel& dx2, bool keep_trace) {
  const std::size_t length = x.length();
  const std::size_t offset = x2.length() - length;
  const bool identical = offset == 0 && x == x2;
  const auto coeffs = layer_coeffs(params);
  const double h2 = params.sigma_h * params.sigma_h;
  const Activation& act = params.activation;

  Eigen::MatrixXd band(params.depth, static_cast<Eigen::Index>(length));
  auto cov = [&](int l, Eigen::Index t) {
    return BivariateCov{dx.diag(l, t), dx2.diag(l, t + static_cast<Eigen::Index>(offset)), band(l, t)};
  };

  for (int l = 0; l < params.depth; ++l) {
    const Coeffs& c = coeffs[static_cast<std::size_t>(l)];
    for (std::size_t t = 0; t < length; ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      double s = c.b2;
      s += l == 0 ? c.u2 * input_dot(x, t, x2, t + offset) : c.u2 * vphi(act, cov(l - 1, ti));
      if (t == 0) {
        if (identical) s += c.w2 * h2;
      } else {
        s += c.w2 * vphi(act, cov(l, ti - 1));
      }
      band(l, ti) = s;
    }
  }
  return assemble(params, coeffs, length, cov, [&](int l, Eigen::Index t) { return band(l, t); },
                  keep_trace);
}

}  // namespace

void RntkParams::validate() const {
  check_positive(sigma_w, "sigma_w");
  check_positive(sigma_u, "sigma_u");
  check_nonnegative(sigma_b, "sigma_b");
  check_nonnegative(sigma_h, "sigma_h");
  check_positive(sigma_v, "sigma_v");
  if (depth < 1) {
    throw InputError("depth must be at least 1");
  }
  if (per_layer) {
    if (per_layer->size() != static_cast<std::size_t>(depth)) {
      throw InputError("per-layer overrides must have exactly `depth` entries");
    }
    for (const auto& s : *per_layer) {
      check_positive(s.sigma_w, "per-layer sigma_w");
      check_positive(s.sigma_u, "per-layer sigma_u");
      check_nonnegative(s.sigma_b, "per-layer sigma_b");
    }
  }
}

LayerSigmas RntkParams::layer(int l) const {
  if (l < 0 || l >= depth) {
    throw InputError("layer index out of range");
  }
  if (per_layer) {
    return (*per_layer)[static_cast<std::size_t>(l)];
  }
  return {sigma_w, sigma_u, sigma_b};
}

std::string RntkParams::describe() const {
  std::ostringstream out;
  out.precision(17);
  out << "activation=" << activation.name() << " depth=" << depth;
  if (per_layer) {
    for (int l = 0; l < depth; ++l) {
      const auto& s = (*per_layer)[static_cast<std::size_t>(l)];
      out << " layer" << (l + 1) << "=(" << s.sigma_w << ',' << s.sigma_u << ',' << s.sigma_b << ')';
    }
  } else {
    out << " sigma_w=" << sigma_w << " sigma_u=" << sigma_u << " sigma_b=" << sigma_b;
  }
  out << " sigma_h=" << sigma_h << " sigma_v=" << sigma_v;
  if (activation.kind() == ActivationKind::Custom) {
    out << " mc_samples=" << activation.mc_samples() << " mc_seed=" << activation.mc_seed();
  }
  return out.str();
}

SelfKernel self_kernel(const RntkParams& params, const Sequence& x) {
  const auto coeffs = layer_coeffs(params);
  const double h2 = params.sigma_h * params.sigma_h;
  SelfKernel out;
  out.diag.resize(params.depth, static_cast<Eigen::Index>(x.length()));
  auto& d = out.diag;
  for (int l = 0; l < params.depth; ++l) {
    const Coeffs& c = coeffs[static_cast<std::size_t>(l)];
    for (std::size_t t = 0; t < x.length(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      double s = c.b2;
      if (l == 0) {
        s += c.u2 * input_dot(x, t, x, t);
      } else {
        const double below = d(l - 1, ti);
        s += c.u2 * vphi(params.activation, {below, below, below});
      }
      if (t == 0) {
        s += c.w2 * h2;
      } else {
        const double prev = d(l, ti - 1);
        s += c.w2 * vphi(params.activation, {prev, prev, prev});
      }
      d(l, ti) = s;
    }
  }
  return out;
}

KernelTable::KernelTable(int layers, std::size_t length, std::size_t length2)
    : length_(length), length2_(length2) {
  if (layers < 1 || length < 1 || length2 < 1) {
    throw InputError("kernel table needs at least one layer and one step per sequence");
  }
  sigma_.assign(static_cast<std::size_t>(layers),
                Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(length), static_cast<Eigen::Index>(length2)));
}

double KernelTable::sigma(int layer, std::size_t t, std::size_t t2) const {
  return sigma_.at(static_cast<std::size_t>(layer))(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2));
}

double& KernelTable::sigma(int layer, std::size_t t, std::size_t t2) {
  return sigma_.at(static_cast<std::size_t>(layer))(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2));
}

BivariateCov KernelTable::cov(int layer, std::size_t t, std::size_t t2) const {
  return {self_x(layer, t), self_x2(layer, t2), sigma(layer, t, t2)};
}

KernelTable forward_table(const RntkParams& params, const Sequence& x, const Sequence& x2) {
  params.validate();
  require_same_dim(x, x2);
  const auto coeffs = layer_coeffs(params);
  const double h2 = params.sigma_h * params.sigma_h;
  const bool identical = x == x2;

  KernelTable table(params.depth, x.length(), x2.length());
  table.self_x_table() = self_kernel(params, x);
  table.self_x2_table() = self_kernel(params, x2);
  for (int l = 0; l < params.depth; ++l) {
    const Coeffs& c = coeffs[static_cast<std::size_t>(l)];
    for (std::size_t t = 0; t < x.length(); ++t) {
      for (std::size_t t2 = 0; t2 < x2.length(); ++t2) {
        double s = c.b2;
        s += l == 0 ? c.u2 * input_dot(x, t, x2, t2) : c.u2 * vphi(params.activation, table.cov(l - 1, t, t2));
        if (t == 0 || t2 == 0) {
          if (t == 0 && t2 == 0 && identical) s += c.w2 * h2;
        } else {
          s += c.w2 * vphi(params.activation, table.cov(l, t - 1, t2 - 1));
        }
        table.sigma(l, t, t2) = s;
      }
    }
  }
  return table;
}

PiBand backward_table(const RntkParams& params, const KernelTable& table, std::size_t length,
                      std::size_t length2) {
  if (length != table.length() || length2 != table.length2()) {
    throw InputError("backward_table lengths do not match the forward table");
  }
  if (length > length2) {
    throw InputError("backward_table expects the shorter sequence first");
  }
  if (table.layers() != params.depth) {
    throw InputError("forward table depth does not match the parameters");
  }
  const auto coeffs = layer_coeffs(params);
  const std::size_t offset = length2 - length;
  auto cov = [&](int l, Eigen::Index t) {
    return table.cov(l, static_cast<std::size_t>(t), static_cast<std::size_t>(t) + offset);
  };
  auto sigma = [&](int l, Eigen::Index t) {
    return table.sigma(l, static_cast<std::size_t>(t), static_cast<std::size_t>(t) + offset);
  };
  PiBand band;
  band.offset = offset;
  assemble(params, coeffs, length, cov, sigma, false, &band.values);
  return band;
}

KernelOutput rntk_pair(const RntkParams& params, const Sequence& x, const Sequence& x2, bool keep_trace) {
  params.validate();
  require_same_dim(x, x2);
  return rntk_pair(params, x, x2, self_kernel(params, x), self_kernel(params, x2), keep_trace);
}

KernelOutput rntk_pair(const RntkParams& params, const Sequence& x, const Sequence& x2,
                       const SelfKernel& self_x, const SelfKernel& self_x2, bool keep_trace) {
  require_same_dim(x, x2);
  const auto expected_rows = static_cast<Eigen::Index>(params.depth);
  if (self_x.diag.rows() != expected_rows || self_x.diag.cols() != static_cast<Eigen::Index>(x.length()) ||
      self_x2.diag.rows() != expected_rows || self_x2.diag.cols() != static_cast<Eigen::Index>(x2.length())) {
    throw InputError("self kernel shape does not match the sequence and depth");
  }
  if (should_swap(x, x2)) {
    return band_pair(params, x2, x, self_x2, self_x, keep_trace);
  }
  return band_pair(params, x, x2, self_x, self_x2, keep_trace);
}

KernelOutput rntk_pair_full(const RntkParams& params, const Sequence& x, const Sequence& x2) {
  const bool swap = should_swap(x, x2);
  const Sequence& a = swap ? x2 : x;
  const Sequence& b = swap ? x : x2;
  const KernelTable table = forward_table(params, a, b);
  const PiBand pi = backward_table(params, table, a.length(), b.length());

  KernelOutput out;
  const int top = params.depth - 1;
  out.nngp = params.sigma_v * params.sigma_v *
             vphi(params.activation, table.cov(top, a.length() - 1, b.length() - 1));
  double theta = 0.0;
  for (int l = 0; l < params.depth; ++l) {
    for (std::size_t t = 0; t < a.length(); ++t) {
      theta += pi.values(l, static_cast<Eigen::Index>(t)) * table.sigma(l, t, t + pi.offset);
    }
  }
  out.theta = theta + out.nngp;
  return out;
}

namespace {

std::string kind_name(KernelKind kind) { return kind == KernelKind::Theta ? "rntk" : "nngp"; }

std::vector<SelfKernel> self_kernels(const RntkParams& params, const std::vector<Sequence>& data) {
  std::vector<SelfKernel> out(data.size());
  parallel_for(data.size(), [&](std::size_t i) { out[i] = self_kernel(params, data[i]); });
  return out;
}

}  // namespace

GramMatrix gram(const RntkParams& params, const std::vector<Sequence>& dataset, KernelKind kind) {
  if (dataset.empty()) {
    throw InputError("cannot build a Gram matrix over an empty dataset");
  }
  params.validate();
  require_same_dim(dataset);
  const auto selfs = self_kernels(params, dataset);

  const std::size_t n = dataset.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      pairs.emplace_back(i, j);
    }
  }

  GramMatrix out;
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  parallel_for(pairs.size(), [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const KernelOutput r = rntk_pair(params, dataset[i], dataset[j], selfs[i], selfs[j]);
    const double value = kind == KernelKind::Theta ? r.theta : r.nngp;
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    out.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
  });
  out.ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back(dataset[i].id().empty() ? std::to_string(i + 1) : dataset[i].id());
  }
  out.kernel_descriptor = kind_name(kind) + " " + params.describe();
  return out;
}

Eigen::MatrixXd cross_gram(const RntkParams& params, const std::vector<Sequence>& rows,
                           const std::vector<Sequence>& cols, KernelKind kind) {
  params.validate();
  if (!rows.empty() && !cols.empty()) {
    require_same_dim(rows.front(), cols.front());
  }
  require_same_dim(rows);
  require_same_dim(cols);
  const auto row_selfs = self_kernels(params, rows);
  const auto col_selfs = self_kernels(params, cols);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  parallel_for(rows.size() * cols.size(), [&](std::size_t k) {
    const std::size_t i = k / cols.size();
    const std::size_t j = k % cols.size();
    const KernelOutput r = rntk_pair(params, rows[i], cols[j], row_selfs[i], col_selfs[j]);
    out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kind == KernelKind::Theta ? r.theta : r.nngp;
  });
  return out;
}

}  // namespace rntk
