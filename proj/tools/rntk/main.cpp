#include "commands.hpp"
#include "config.hpp"

#include <rntk/error.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <functional>
#include <iostream>
#include <optional>

namespace {

using rntk::cli::RunConfig;

// Flag values; each one set on the command line overrides the config file.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> sigma_w, sigma_u, sigma_b, sigma_h, sigma_v;
  std::optional<int> depth;
  std::optional<std::string> activation;
  std::optional<std::size_t> mc_samples;

  std::optional<std::string> kernel;
  std::vector<std::string> inputs;
  bool normalize = false;
  std::optional<std::string> padding;
  std::optional<double> rbf_alpha;
  std::optional<int> poly_degree;
  std::optional<double> poly_offset;
  std::optional<int> mlp_depth;
  std::optional<double> mlp_sigma_w, mlp_sigma_b;

  std::optional<std::size_t> t_fixed, t_var, n_train, n_test, split_index;
  std::optional<double> noise_sigma;
  std::optional<std::string> csv;
  std::optional<bool> standardize;
  bool test_on_train = false;
  std::optional<std::size_t> repeats, folds;
  std::optional<double> lambda;
  std::vector<std::string> kernels;
  std::optional<std::string> grid;

  std::optional<std::size_t> length, trials, input_dim;
  std::optional<double> fd_step;

  std::vector<std::size_t> widths;
  std::optional<std::size_t> pairs;
  bool tied_only = false;

  std::optional<std::size_t> steps, sequences, networks;
  std::optional<double> lr, lr_fraction;

  std::optional<std::size_t> points, width;
};

template <typename T, typename U>
void take(const std::optional<T>& flag, U& target) {
  if (flag) target = *flag;
}

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) rntk::cli::apply_json_file(c, *f.config);
  take(f.seed, c.seed);
  take(f.out, c.out);
  take(f.sigma_w, c.sigma_w);
  take(f.sigma_u, c.sigma_u);
  take(f.sigma_b, c.sigma_b);
  take(f.sigma_h, c.sigma_h);
  take(f.sigma_v, c.sigma_v);
  take(f.depth, c.depth);
  take(f.activation, c.activation);
  take(f.mc_samples, c.mc_samples);

  take(f.kernel, c.kernel);
  if (!f.inputs.empty()) c.inputs = f.inputs;
  if (f.normalize) c.normalize = true;
  take(f.padding, c.padding);
  take(f.rbf_alpha, c.rbf_alpha);
  take(f.poly_degree, c.poly_degree);
  take(f.poly_offset, c.poly_offset);
  take(f.mlp_depth, c.mlp_depth);
  take(f.mlp_sigma_w, c.mlp_sigma_w);
  take(f.mlp_sigma_b, c.mlp_sigma_b);

  take(f.t_fixed, c.task.t_fixed);
  take(f.t_var, c.task.t_var);
  take(f.n_train, c.task.n_train);
  take(f.n_test, c.task.n_test);
  take(f.noise_sigma, c.task.noise_sigma);
  take(f.standardize, c.task.standardize);
  take(f.split_index, c.split_index);
  if (f.csv) c.task_csv = f.csv;
  if (f.test_on_train) c.test_on_train = true;
  take(f.repeats, c.repeats);
  take(f.folds, c.folds);
  if (f.lambda) c.lambda = f.lambda;
  if (!f.kernels.empty()) c.kernels = f.kernels;
  take(f.grid, c.grid);

  take(f.length, c.sensitivity.length);
  take(f.length, c.converge.length);
  take(f.length, c.drift_length);
  take(f.trials, c.sensitivity.trials);
  take(f.input_dim, c.sensitivity.input_dim);
  take(f.input_dim, c.converge.input_dim);
  take(f.fd_step, c.sensitivity.fd_step);

  if (!f.widths.empty()) {
    c.converge.widths = f.widths;
    c.drift_widths = f.widths;
  }
  take(f.pairs, c.converge.pairs);
  if (f.tied_only) c.converge.untied = false;

  take(f.steps, c.drift_steps);
  take(f.sequences, c.drift_sequences);
  take(f.networks, c.drift_networks);
  take(f.networks, c.curve_networks);
  if (f.lr) c.drift_lr = f.lr;
  take(f.lr_fraction, c.drift_lr_fraction);

  take(f.points, c.curve_points);
  take(f.width, c.curve_width);
  return c;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON config file; flags override its values");
  sub->add_option("--seed", f.seed, "Top-level seed");
  sub->add_option("--out", f.out, "Output path prefix");
  sub->add_option("--sigma-w", f.sigma_w, "Recurrent weight scale");
  sub->add_option("--sigma-u", f.sigma_u, "Input weight scale");
  sub->add_option("--sigma-b", f.sigma_b, "Bias scale");
  sub->add_option("--sigma-h", f.sigma_h, "Initial state scale");
  sub->add_option("--sigma-v", f.sigma_v, "Readout scale");
  sub->add_option("--depth", f.depth, "Number of recurrent layers");
  sub->add_option("--activation", f.activation, "relu, erf or tanh (Monte Carlo)");
  sub->add_option("--mc-samples", f.mc_samples, "Monte Carlo samples for tanh");
}

void add_baseline(CLI::App* sub, Flags& f) {
  sub->add_option("--padding", f.padding, "Unequal lengths for baselines: zero or error");
  sub->add_option("--rbf-alpha", f.rbf_alpha, "RBF width parameter");
  sub->add_option("--poly-degree", f.poly_degree, "Polynomial degree");
  sub->add_option("--poly-offset", f.poly_offset, "Polynomial offset");
  sub->add_option("--mlp-depth", f.mlp_depth, "MLP-NTK hidden layers");
  sub->add_option("--mlp-sigma-w", f.mlp_sigma_w, "MLP-NTK weight scale");
  sub->add_option("--mlp-sigma-b", f.mlp_sigma_b, "MLP-NTK bias scale");
}

void print_error(const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent neural tangent kernels for variable-length time series"};
  app.require_subcommand(1);
  Flags f;
  std::function<void(const RunConfig&)> command;

  auto* gram = app.add_subcommand("gram", "Kernel matrix over CSV sequences (one file per sequence)");
  add_common(gram, f);
  add_baseline(gram, f);
  gram->add_option("--kernel", f.kernel, "rntk, nngp, rbf, poly or mlp-ntk");
  gram->add_flag("--normalize", f.normalize, "Scale each sequence to unit norm");
  gram->add_option("inputs", f.inputs, "Input CSV files");
  gram->callback([&] { command = rntk::cli::run_gram; });

  auto* regress = app.add_subcommand("regress", "Next-step kernel ridge regression on windowed series");
  add_common(regress, f);
  add_baseline(regress, f);
  regress->add_option("--t-fixed", f.t_fixed, "Shortest window");
  regress->add_option("--t-var", f.t_var, "Extra window length range");
  regress->add_option("--n-train", f.n_train, "Training windows");
  regress->add_option("--n-test", f.n_test, "Test windows");
  regress->add_option("--noise-sigma", f.noise_sigma, "Sinusoid noise level");
  regress->add_option("--csv", f.csv, "Series CSV instead of the sinusoid");
  regress->add_option("--split-index", f.split_index, "First row of the test region (CSV tasks)");
  regress->add_option("--standardize", f.standardize, "Standardize CSV columns (true/false)");
  regress->add_flag("--test-on-train", f.test_on_train, "Evaluate on the training windows");
  regress->add_option("--repeats", f.repeats, "Independent task draws");
  regress->add_option("--lambda", f.lambda, "Fixed ridge lambda (default: cross-validated)");
  regress->add_option("--folds", f.folds, "Cross-validation folds");
  regress->add_option("--kernels", f.kernels, "Kernels to compare (rntk nngp rbf poly mlp-ntk pts)");
  regress->add_option("--grid", f.grid, "standard (cross-validated hyperparameter grids) or fixed");
  regress->callback([&] { command = rntk::cli::run_regress; });

  auto* sensitivity = app.add_subcommand("sensitivity", "Per-step sensitivity profile of the kernel");
  add_common(sensitivity, f);
  sensitivity->add_option("--length", f.length, "Sequence length");
  sensitivity->add_option("--trials", f.trials, "Random pairs averaged");
  sensitivity->add_option("--input-dim", f.input_dim, "Input dimension");
  sensitivity->add_option("--fd-step", f.fd_step, "Central difference step");
  sensitivity->callback([&] { command = rntk::cli::run_sensitivity; });

  auto* converge = app.add_subcommand("converge", "Empirical versus analytic kernel across widths");
  add_common(converge, f);
  converge->add_option("--widths", f.widths, "Network widths");
  converge->add_option("--pairs", f.pairs, "Random pairs per width");
  converge->add_option("--length", f.length, "Sequence length");
  converge->add_option("--input-dim", f.input_dim, "Input dimension");
  converge->add_flag("--tied-only", f.tied_only, "Skip the untied networks");
  converge->callback([&] { command = rntk::cli::run_converge; });

  auto* drift = app.add_subcommand("drift", "Parameter and kernel drift under gradient descent");
  add_common(drift, f);
  drift->add_option("--widths", f.widths, "Network widths");
  drift->add_option("--steps", f.steps, "Gradient descent steps");
  drift->add_option("--lr", f.lr, "Learning rate (default: lr-fraction times the stable bound)");
  drift->add_option("--lr-fraction", f.lr_fraction, "Fraction of 2/(lambda_min+lambda_max)");
  drift->add_option("--sequences", f.sequences, "Training sequences");
  drift->add_option("--length", f.length, "Sequence length");
  drift->add_option("--networks", f.networks, "Networks averaged per width");
  drift->callback([&] { command = rntk::cli::run_drift; });

  auto* curve = app.add_subcommand("curve", "Kernel between {1,-1,1} and {cos a, sin a} over a in [0, 2pi]");
  add_common(curve, f);
  curve->add_option("--points", f.points, "Grid points");
  curve->add_option("--width", f.width, "Also average the empirical kernel at this width");
  curve->add_option("--networks", f.networks, "Networks averaged per point");
  curve->callback([&] { command = rntk::cli::run_curve; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("input", e.what());
    return 2;
  }

  try {
    command(resolve(f));
  } catch (const rntk::InputError& e) {
    print_error("input", e.what());
    return 2;
  } catch (const rntk::NumericError& e) {
    print_error("numeric", e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
