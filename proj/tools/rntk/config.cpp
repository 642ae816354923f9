#include "config.hpp"

#include <rntk/error.hpp>
#include <rntk/random.hpp>

#include <cmath>
#include <fstream>

namespace rntk::cli {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& section, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw InputError("config section '" + section + "' must be an object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto key : allowed) known = known || item.key() == key;
    if (!known) {
      throw InputError("unknown config key '" + item.key() + "' in section '" + section + "'");
    }
  }
}

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  throw InputError("config key '" + key + "' must be " + expected);
}

void read(const json& obj, const char* key, double& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number()) bad_type(key, "a number");
  out = obj[key].get<double>();
}

void read(const json& obj, const char* key, std::optional<double>& out) {
  if (!obj.contains(key)) return;
  double value = 0.0;
  read(obj, key, value);
  out = value;
}

void read(const json& obj, const char* key, int& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number_integer()) bad_type(key, "an integer");
  out = obj[key].get<int>();
}

void read(const json& obj, const char* key, std::uint64_t& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_number_unsigned()) bad_type(key, "a nonnegative integer");
  out = obj[key].get<std::uint64_t>();
}

void read(const json& obj, const char* key, std::optional<std::uint64_t>& out) {
  if (!obj.contains(key)) return;
  std::uint64_t value = 0;
  read(obj, key, value);
  out = value;
}

void read(const json& obj, const char* key, bool& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_boolean()) bad_type(key, "a boolean");
  out = obj[key].get<bool>();
}

void read(const json& obj, const char* key, std::string& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_string()) bad_type(key, "a string");
  out = obj[key].get<std::string>();
}

void read(const json& obj, const char* key, std::optional<std::string>& out) {
  if (!obj.contains(key)) return;
  std::string value;
  read(obj, key, value);
  out = value;
}

template <typename T>
void read(const json& obj, const char* key, std::vector<T>& out) {
  if (!obj.contains(key)) return;
  if (!obj[key].is_array()) bad_type(key, "an array");
  std::vector<T> values;
  for (std::size_t i = 0; i < obj[key].size(); ++i) {
    json wrapper = {{"item", obj[key][i]}};
    T value{};
    read(wrapper, "item", value);
    values.push_back(value);
  }
  out = std::move(values);
}

void read_layers(const json& obj, std::optional<std::vector<LayerSigmas>>& out) {
  if (!obj.contains("per_layer")) return;
  const json& list = obj["per_layer"];
  if (!list.is_array()) bad_type("per_layer", "an array of [sigma_w, sigma_u, sigma_b] triples");
  std::vector<LayerSigmas> layers;
  for (const auto& entry : list) {
    if (!entry.is_array() || entry.size() != 3 || !entry[0].is_number() || !entry[1].is_number() ||
        !entry[2].is_number()) {
      bad_type("per_layer", "an array of [sigma_w, sigma_u, sigma_b] triples");
    }
    layers.push_back({entry[0].get<double>(), entry[1].get<double>(), entry[2].get<double>()});
  }
  out = std::move(layers);
}

}  // namespace

void apply_json(RunConfig& c, const json& doc) {
  check_keys(doc, "top level",
             {"seed", "out", "rntk", "baseline", "task", "gram", "sensitivity", "converge", "drift", "regress", "curve"});
  read(doc, "seed", c.seed);
  read(doc, "out", c.out);

  if (doc.contains("rntk")) {
    const json& s = doc["rntk"];
    check_keys(s, "rntk", {"sigma_w", "sigma_u", "sigma_b", "sigma_h", "sigma_v", "depth", "activation", "per_layer",
                           "mc_samples", "mc_seed"});
    read(s, "sigma_w", c.sigma_w);
    read(s, "sigma_u", c.sigma_u);
    read(s, "sigma_b", c.sigma_b);
    read(s, "sigma_h", c.sigma_h);
    read(s, "sigma_v", c.sigma_v);
    read(s, "depth", c.depth);
    read(s, "activation", c.activation);
    read_layers(s, c.per_layer);
    read(s, "mc_samples", c.mc_samples);
    read(s, "mc_seed", c.mc_seed);
  }
  if (doc.contains("baseline")) {
    const json& s = doc["baseline"];
    check_keys(s, "baseline",
               {"rbf_alpha", "poly_degree", "poly_offset", "mlp_depth", "mlp_sigma_w", "mlp_sigma_b", "padding"});
    read(s, "rbf_alpha", c.rbf_alpha);
    read(s, "poly_degree", c.poly_degree);
    read(s, "poly_offset", c.poly_offset);
    read(s, "mlp_depth", c.mlp_depth);
    read(s, "mlp_sigma_w", c.mlp_sigma_w);
    read(s, "mlp_sigma_b", c.mlp_sigma_b);
    read(s, "padding", c.padding);
  }
  if (doc.contains("task")) {
    const json& s = doc["task"];
    check_keys(s, "task", {"t_fixed", "t_var", "noise_sigma", "n_train", "n_test", "standardize", "csv",
                           "split_index", "test_on_train"});
    read(s, "t_fixed", c.task.t_fixed);
    read(s, "t_var", c.task.t_var);
    read(s, "noise_sigma", c.task.noise_sigma);
    read(s, "n_train", c.task.n_train);
    read(s, "n_test", c.task.n_test);
    read(s, "standardize", c.task.standardize);
    read(s, "csv", c.task_csv);
    read(s, "split_index", c.split_index);
    read(s, "test_on_train", c.test_on_train);
  }
  if (doc.contains("gram")) {
    const json& s = doc["gram"];
    check_keys(s, "gram", {"kernel", "inputs", "normalize"});
    read(s, "kernel", c.kernel);
    read(s, "inputs", c.inputs);
    read(s, "normalize", c.normalize);
  }
  if (doc.contains("sensitivity")) {
    const json& s = doc["sensitivity"];
    check_keys(s, "sensitivity", {"length", "input_dim", "trials", "fd_step"});
    read(s, "length", c.sensitivity.length);
    read(s, "input_dim", c.sensitivity.input_dim);
    read(s, "trials", c.sensitivity.trials);
    read(s, "fd_step", c.sensitivity.fd_step);
  }
  if (doc.contains("converge")) {
    const json& s = doc["converge"];
    check_keys(s, "converge", {"widths", "pairs", "length", "input_dim", "untied"});
    read(s, "widths", c.converge.widths);
    read(s, "pairs", c.converge.pairs);
    read(s, "length", c.converge.length);
    read(s, "input_dim", c.converge.input_dim);
    read(s, "untied", c.converge.untied);
  }
  if (doc.contains("drift")) {
    const json& s = doc["drift"];
    check_keys(s, "drift", {"widths", "steps", "lr", "lr_fraction", "sequences", "length", "networks"});
    read(s, "widths", c.drift_widths);
    read(s, "steps", c.drift_steps);
    read(s, "lr", c.drift_lr);
    read(s, "lr_fraction", c.drift_lr_fraction);
    read(s, "sequences", c.drift_sequences);
    read(s, "length", c.drift_length);
    read(s, "networks", c.drift_networks);
  }
  if (doc.contains("regress")) {
    const json& s = doc["regress"];
    check_keys(s, "regress", {"repeats", "kernels", "lambda", "lambdas", "folds", "grid"});
    read(s, "grid", c.grid);
    read(s, "repeats", c.repeats);
    read(s, "kernels", c.kernels);
    read(s, "lambda", c.lambda);
    read(s, "lambdas", c.lambdas);
    read(s, "folds", c.folds);
  }
  if (doc.contains("curve")) {
    const json& s = doc["curve"];
    check_keys(s, "curve", {"points", "width", "networks"});
    read(s, "points", c.curve_points);
    read(s, "width", c.curve_width);
    read(s, "networks", c.curve_networks);
  }
}

void apply_json_file(RunConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open config " + path);
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config " + path + " is not valid JSON: " + e.what());
  }
  apply_json(config, doc);
}

RntkParams RunConfig::rntk_params() const {
  RntkParams p;
  p.sigma_w = sigma_w;
  p.sigma_u = sigma_u;
  p.sigma_b = sigma_b;
  p.sigma_h = sigma_h;
  p.sigma_v = sigma_v;
  p.depth = depth;
  p.per_layer = per_layer;
  if (activation == "relu") {
    p.activation = Activation::relu();
  } else if (activation == "erf") {
    p.activation = Activation::erf();
  } else if (activation == "tanh") {
    p.activation = Activation::custom([](double z) { return std::tanh(z); },
                                      [](double z) {
                                        const double t = std::tanh(z);
                                        return 1.0 - t * t;
                                      },
                                      mc_samples, mc_seed.value_or(Rng::derive(seed, "kernel-mc")), "tanh");
  } else {
    throw InputError("unknown activation '" + activation + "' (expected relu, erf or tanh)");
  }
  p.validate();
  return p;
}

BaselineParams RunConfig::baseline_params(const std::string& name) const {
  BaselineParams p;
  if (name == "rbf") {
    p.kind = BaselineKind::Rbf;
  } else if (name == "poly") {
    p.kind = BaselineKind::Polynomial;
  } else if (name == "mlp-ntk") {
    p.kind = BaselineKind::MlpNtk;
  } else {
    throw InputError("unknown baseline kernel '" + name + "'");
  }
  p.alpha = rbf_alpha;
  p.degree = poly_degree;
  p.offset = poly_offset;
  p.depth = mlp_depth;
  p.sigma_w = mlp_sigma_w;
  p.sigma_b = mlp_sigma_b;
  if (activation == "erf") p.activation = Activation::erf();
  if (padding == "zero") {
    p.padding = PaddingPolicy::ZeroPadToMax;
  } else if (padding == "error") {
    p.padding = PaddingPolicy::ErrorOnMismatch;
  } else {
    throw InputError("unknown padding policy '" + padding + "' (expected zero or error)");
  }
  p.validate();
  return p;
}

nlohmann::json RunConfig::to_json() const {
  json layers = json::array();
  if (per_layer) {
    for (const auto& s : *per_layer) layers.push_back({s.sigma_w, s.sigma_u, s.sigma_b});
  }
  json j;
  j["seed"] = seed;
  j["out"] = out;
  j["rntk"] = {{"sigma_w", sigma_w}, {"sigma_u", sigma_u}, {"sigma_b", sigma_b},       {"sigma_h", sigma_h},
               {"sigma_v", sigma_v}, {"depth", depth},     {"activation", activation}, {"mc_samples", mc_samples}};
  if (per_layer) j["rntk"]["per_layer"] = layers;
  if (mc_seed) j["rntk"]["mc_seed"] = *mc_seed;
  j["baseline"] = {{"rbf_alpha", rbf_alpha},     {"poly_degree", poly_degree}, {"poly_offset", poly_offset},
                   {"mlp_depth", mlp_depth},     {"mlp_sigma_w", mlp_sigma_w}, {"mlp_sigma_b", mlp_sigma_b},
                   {"padding", padding}};
  j["task"] = {{"t_fixed", task.t_fixed},         {"t_var", task.t_var},        {"noise_sigma", task.noise_sigma},
               {"n_train", task.n_train},         {"n_test", task.n_test},      {"standardize", task.standardize},
               {"split_index", split_index},      {"test_on_train", test_on_train}};
  if (task_csv) j["task"]["csv"] = *task_csv;
  j["gram"] = {{"kernel", kernel}, {"inputs", inputs}, {"normalize", normalize}};
  j["sensitivity"] = {{"length", sensitivity.length},
                      {"input_dim", sensitivity.input_dim},
                      {"trials", sensitivity.trials},
                      {"fd_step", sensitivity.fd_step}};
  j["converge"] = {{"widths", converge.widths},
                   {"pairs", converge.pairs},
                   {"length", converge.length},
                   {"input_dim", converge.input_dim},
                   {"untied", converge.untied}};
  j["drift"] = {{"widths", drift_widths},       {"steps", drift_steps},         {"lr_fraction", drift_lr_fraction},
                {"sequences", drift_sequences}, {"length", drift_length},       {"networks", drift_networks}};
  if (drift_lr) j["drift"]["lr"] = *drift_lr;
  j["regress"] = {{"repeats", repeats}, {"kernels", kernels}, {"lambdas", lambdas}, {"folds", folds}, {"grid", grid}};
  if (lambda) j["regress"]["lambda"] = *lambda;
  j["curve"] = {{"points", curve_points}, {"width", curve_width}, {"networks", curve_networks}};
  return j;
}

}  // namespace rntk::cli
