#include "commands.hpp"

#include <rntk/error.hpp>
#include <rntk/learners.hpp>
#include <rntk/random.hpp>
#include <rntk/regression.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <span>
#include <sstream>

namespace rntk::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

// Relative residual below which a regression fit counts as exact.
constexpr double kExactFitTolerance = 1e-9;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out || !(out << text) || !out.flush()) {
    throw InputError("cannot write " + path);
  }
}

std::string out_prefix(const RunConfig& config, const char* command) {
  return config.out.empty() ? std::string("rntk-") + command : config.out;
}

void write_manifest(const RunConfig& config, const std::string& prefix, const char* command, json results,
                    Clock::time_point started) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config.to_json();
  manifest["results"] = std::move(results);
  manifest["elapsed_seconds"] = std::chrono::duration<double>(Clock::now() - started).count();
  write_file(prefix + ".json", manifest.dump(2) + "\n");
}

json number_or_sentinel(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  return value;
}

std::string format(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << value;
  return out.str();
}

bool is_rntk_kernel(const std::string& name) { return name == "rntk" || name == "nngp"; }

KernelKind kind_of(const std::string& name) { return name == "nngp" ? KernelKind::Nngp : KernelKind::Theta; }

std::vector<Sequence> random_sequences(std::uint64_t seed, std::size_t count, std::size_t length) {
  std::vector<Sequence> out;
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = Rng::substream(seed, "trials", {i});
    Eigen::MatrixXd data(static_cast<Eigen::Index>(length), 1);
    rng.fill_normal(std::span<double>(data.data(), static_cast<std::size_t>(data.size())));
    out.emplace_back(std::move(data), "s" + std::to_string(i + 1));
  }
  return out;
}

}  // namespace

void run_gram(const RunConfig& config) {
  const auto started = Clock::now();
  if (config.inputs.empty()) {
    throw InputError("gram needs at least one input CSV");
  }
  std::vector<Sequence> data = read_sequences(config.inputs);
  if (config.normalize) data = normalize_sequences(data);

  GramMatrix g;
  if (is_rntk_kernel(config.kernel)) {
    g = gram(config.rntk_params(), data, kind_of(config.kernel));
  } else {
    g = baseline_gram(config.baseline_params(config.kernel), data);
  }
  g.validate();
  const auto [lo, hi] = g.eigen_range();

  const std::string prefix = out_prefix(config, "gram");
  std::ostringstream csv;
  write_gram_csv(csv, g);
  write_file(prefix + ".csv", csv.str());
  std::ostringstream kernel;
  write_precomputed_kernel(kernel, g);
  write_file(prefix + ".kernel", kernel.str());

  json results = {{"ids", g.ids},
                  {"kernel_descriptor", g.kernel_descriptor},
                  {"min_eigenvalue", lo},
                  {"max_eigenvalue", hi},
                  {"psd_ok", lo >= -1e-8 * std::abs(hi)}};
  write_manifest(config, prefix, "gram", results, started);
  std::cout << json{{"size", g.size()}, {"min_eigenvalue", lo}, {"max_eigenvalue", hi}}.dump() << "\n";
}

void run_regress(const RunConfig& config) {
  const auto started = Clock::now();
  if (config.repeats < 1) throw InputError("repeats must be at least 1");
  if (config.kernels.empty()) throw InputError("at least one kernel is required");
  if (config.grid != "standard" && config.grid != "fixed") {
    throw InputError("regress grid must be 'standard' or 'fixed'");
  }
  const PaddingPolicy padding = config.baseline_params("rbf").padding;
  std::vector<KernelFamily> families;
  for (const auto& name : config.kernels) {
    KernelFamily family{name, {}};
    if (name == "pts") {
      // no candidates
    } else if (config.grid == "standard") {
      family.candidates = standard_grid(name, padding);
    } else if (is_rntk_kernel(name)) {
      family.candidates.push_back(RntkChoice{config.rntk_params(), kind_of(name)});
    } else {
      family.candidates.push_back(config.baseline_params(name));
    }
    families.push_back(std::move(family));
  }
  const std::vector<double> lambdas = config.lambda ? std::vector<double>{*config.lambda} : config.lambdas;
  std::optional<Eigen::MatrixXd> series;
  if (config.task_csv) series = read_csv(*config.task_csv);

  std::ostringstream csv;
  csv << "repeat,kernel,snr_db,lambda,hyperparameters\n";
  std::map<std::string, std::vector<double>> snrs;
  json repeat_seeds = json::array();
  std::string first_task;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    WindowConfig task_config = config.task;
    task_config.seed = Rng::derive(config.seed, "windows", {r});
    repeat_seeds.push_back(task_config.seed);
    WindowedRegressionTask task = series ? make_series_task(*series, config.split_index, task_config, *config.task_csv)
                                         : make_sinusoid_task(task_config);
    if (config.test_on_train) task.test = task.train;
    if (r == 0) first_task = task.manifest_json();

    const auto outcomes = evaluate_regression(task, families, lambdas, config.folds,
                                              Rng::derive(config.seed, "folds", {r}), kExactFitTolerance);
    for (const auto& o : outcomes) {
      snrs[o.name].push_back(o.snr_db);
      csv << r << ',' << o.name << ',' << format(o.snr_db) << ',' << format(o.lambda) << ",\"" << o.descriptor
          << "\"\n";
    }
  }

  json summary = json::object();
  for (const auto& name : config.kernels) {
    const auto& values = snrs[name];
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    summary[name] = {{"mean_snr_db", number_or_sentinel(mean)}};
  }
  const std::string prefix = out_prefix(config, "regress");
  write_file(prefix + ".csv", csv.str());
  write_file(prefix + ".task.json", first_task + "\n");
  write_manifest(config, prefix, "regress", {{"kernels", summary}, {"repeat_seeds", repeat_seeds}}, started);
  std::cout << json{{"kernels", summary}}.dump() << "\n";
}

void run_sensitivity(const RunConfig& config) {
  const auto started = Clock::now();
  SensitivityConfig sc = config.sensitivity;
  sc.seed = config.seed;
  const SensitivityProfile profile = sensitivity_profile(config.rntk_params(), sc);
  std::ostringstream csv;
  csv << "t,s_raw_mean,s_normalized\n";
  for (std::size_t t = 0; t < profile.raw.size(); ++t) {
    csv << (t + 1) << ',' << format(profile.raw[t]) << ',' << format(profile.normalized[t]) << '\n';
  }
  const std::string prefix = out_prefix(config, "sensitivity");
  write_file(prefix + ".csv", csv.str());
  const auto peak = std::max_element(profile.normalized.begin(), profile.normalized.end());
  const auto low = std::min_element(profile.normalized.begin(), profile.normalized.end());
  json results = {{"argmax_t", peak - profile.normalized.begin() + 1}, {"min_normalized", *low}};
  write_manifest(config, prefix, "sensitivity", results, started);
  std::cout << results.dump() << "\n";
}

void run_converge(const RunConfig& config) {
  const auto started = Clock::now();
  ConvergenceConfig cc = config.converge;
  cc.seed = config.seed;
  const auto samples = convergence_samples(config.rntk_params(), cc);
  const auto rows = summarize_convergence(samples);

  std::ostringstream csv;
  csv << "width,median_rel_error_tied,median_rel_error_untied\n";
  std::vector<double> widths;
  std::vector<double> tied;
  std::vector<double> untied;
  for (const auto& row : rows) {
    csv << row.width << ',' << format(row.median_rel_error_tied) << ',' << format(row.median_rel_error_untied) << '\n';
    widths.push_back(static_cast<double>(row.width));
    tied.push_back(row.median_rel_error_tied);
    untied.push_back(row.median_rel_error_untied);
  }
  json results;
  if (rows.size() >= 2) {
    results["slope_tied"] = loglog_slope(widths, tied);
    if (cc.untied) results["slope_untied"] = loglog_slope(widths, untied);
  }
  json sample_list = json::array();
  for (const auto& s : samples) {
    sample_list.push_back({{"width", s.width},
                           {"pair", s.pair},
                           {"analytic", s.analytic},
                           {"tied", s.tied},
                           {"untied", number_or_sentinel(s.untied)}});
  }
  const std::string prefix = out_prefix(config, "converge");
  write_file(prefix + ".csv", csv.str());
  json manifest_results = results;
  manifest_results["samples"] = sample_list;
  write_manifest(config, prefix, "converge", manifest_results, started);
  std::cout << results.dump() << "\n";
}

void run_drift(const RunConfig& config) {
  const auto started = Clock::now();
  if (config.drift_networks < 1) throw InputError("drift needs at least one network per width");
  const RntkParams params = config.rntk_params();
  const auto data = random_sequences(config.seed, config.drift_sequences, config.drift_length);
  std::vector<double> targets;
  Rng target_rng = Rng::substream(config.seed, "targets");
  for (std::size_t i = 0; i < data.size(); ++i) targets.push_back(target_rng.normal());
  const double bound = stable_learning_rate(params, data);
  const double lr = config.drift_lr.value_or(config.drift_lr_fraction * bound);

  std::ostringstream csv;
  csv << "width,param_drift,gram_drift,final_loss\n";
  json rows = json::array();
  for (std::size_t width : config.drift_widths) {
    double param_drift = 0.0;
    double gram_drift = 0.0;
    double loss = 0.0;
    for (std::size_t k = 0; k < config.drift_networks; ++k) {
      const FiniteRnn rnn(params, width, 1, Rng::derive(config.seed, "init", {width, k}));
      const DriftReport report = drift_experiment(rnn, data, targets, lr, config.drift_steps);
      param_drift += report.param_drift;
      gram_drift += report.gram_drift;
      loss += report.loss.back();
    }
    const double count = static_cast<double>(config.drift_networks);
    csv << width << ',' << format(param_drift / count) << ',' << format(gram_drift / count) << ','
        << format(loss / count) << '\n';
    rows.push_back({{"width", width},
                    {"param_drift", param_drift / count},
                    {"gram_drift", gram_drift / count},
                    {"final_loss", loss / count}});
  }
  const std::string prefix = out_prefix(config, "drift");
  write_file(prefix + ".csv", csv.str());
  json results = {{"lr", lr}, {"lr_bound", bound}, {"rows", rows}};
  write_manifest(config, prefix, "drift", results, started);
  std::cout << results.dump() << "\n";
}

void run_curve(const RunConfig& config) {
  const auto started = Clock::now();
  if (config.curve_points < 2) throw InputError("curve needs at least two points");
  const RntkParams params = config.rntk_params();
  const Sequence x = Sequence::from_values({1.0, -1.0, 1.0}, "x");

  std::ostringstream csv;
  csv << "alpha,theta,nngp";
  if (config.curve_width > 0) csv << ",empirical_mean,empirical_se";
  csv << '\n';
  for (std::size_t k = 0; k < config.curve_points; ++k) {
    const double alpha = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(config.curve_points - 1);
    const Sequence x2 = Sequence::from_values({std::cos(alpha), std::sin(alpha)}, "x2");
    const KernelOutput analytic = rntk_pair(params, x, x2);
    csv << format(alpha) << ',' << format(analytic.theta) << ',' << format(analytic.nngp);
    if (config.curve_width > 0) {
      std::vector<double> values(config.curve_networks);
      for (std::size_t j = 0; j < config.curve_networks; ++j) {
        const FiniteRnn rnn(params, config.curve_width, 1, Rng::derive(config.seed, "init", {config.curve_width, j}));
        values[j] = empirical_ntk(rnn, x, x2).value;
      }
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double var = 0.0;
      for (double v : values) var += (v - mean) * (v - mean);
      const double se = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1) /
                                                      static_cast<double>(values.size()))
                                          : 0.0;
      csv << ',' << format(mean) << ',' << format(se);
    }
    csv << '\n';
  }
  const std::string prefix = out_prefix(config, "curve");
  write_file(prefix + ".csv", csv.str());
  write_manifest(config, prefix, "curve", json::object(), started);
  std::cout << json{{"points", config.curve_points}, {"csv", prefix + ".csv"}}.dump() << "\n";
}

}  // namespace rntk::cli
