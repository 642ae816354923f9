#include "rntk/datasets.hpp"

#include "rntk/error.hpp"
#include "rntk/random.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace rntk {

namespace {

constexpr std::size_t kSinusoidSamples = 1000;
constexpr std::size_t kMaxDraws = 10'000'000;

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return std::string(text.substr(first, last - first + 1));
}

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream stream(line);
  std::string field;
  while (std::getline(stream, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Sequence window_of(const Eigen::MatrixXd& series, std::size_t start, std::size_t length, std::string id) {
  return Sequence(series.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(length)),
                  std::move(id));
}

// Draws `count` windows. `place` maps a drawn length to a candidate start
// (or returns false to reject the draw).
template <typename Place>
std::vector<LabeledWindow> draw_windows(const Eigen::MatrixXd& series, std::size_t count,
                                        const WindowConfig& config, Rng& rng, const std::string& tag,
                                        Place&& place) {
  std::vector<LabeledWindow> out;
  out.reserve(count);
  std::size_t draws = 0;
  while (out.size() < count) {
    if (++draws > kMaxDraws) {
      throw InputError("could not place " + tag + " windows; the series is too short for the window lengths");
    }
    const std::size_t length = config.t_fixed + rng.uniform_int(0, config.t_var);
    std::size_t start = 0;
    if (!place(length, start)) continue;
    LabeledWindow w;
    w.start = start;
    w.inputs = window_of(series, start, length, tag + std::to_string(out.size() + 1));
    w.target = series(static_cast<Eigen::Index>(start + length), 0);
    out.push_back(std::move(w));
  }
  return out;
}

void check_window_config(const WindowConfig& config) {
  if (config.t_fixed < 1) throw InputError("t_fixed must be at least 1");
  if (config.n_train < 1) throw InputError("n_train must be at least 1");
  if (!(config.noise_sigma >= 0.0) || !std::isfinite(config.noise_sigma)) {
    throw InputError("noise_sigma must be nonnegative");
  }
}

nlohmann::json windows_json(const std::vector<LabeledWindow>& windows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : windows) {
    out.push_back({{"start", w.start}, {"length", w.inputs.length()}, {"target", w.target}});
  }
  return out;
}

}  // namespace

std::vector<Sequence> WindowedRegressionTask::train_inputs() const {
  std::vector<Sequence> out;
  for (const auto& w : train) out.push_back(w.inputs);
  return out;
}

std::vector<Sequence> WindowedRegressionTask::test_inputs() const {
  std::vector<Sequence> out;
  for (const auto& w : test) out.push_back(w.inputs);
  return out;
}

Eigen::VectorXd WindowedRegressionTask::train_targets() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(train.size()));
  for (std::size_t i = 0; i < train.size(); ++i) out(static_cast<Eigen::Index>(i)) = train[i].target;
  return out;
}

Eigen::VectorXd WindowedRegressionTask::test_targets() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(test.size()));
  for (std::size_t i = 0; i < test.size(); ++i) out(static_cast<Eigen::Index>(i)) = test[i].target;
  return out;
}

Eigen::VectorXd WindowedRegressionTask::test_last_values() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(test.size()));
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& d = test[i].inputs.data();
    out(static_cast<Eigen::Index>(i)) = d(d.rows() - 1, 0);
  }
  return out;
}

std::string WindowedRegressionTask::manifest_json() const {
  nlohmann::json j;
  j["source"] = source;
  j["series_length"] = series_length;
  j["split_index"] = split_index;
  j["config"] = {{"t_fixed", config.t_fixed},     {"t_var", config.t_var},   {"noise_sigma", config.noise_sigma},
                 {"n_train", config.n_train},     {"n_test", config.n_test}, {"seed", config.seed},
                 {"standardize", config.standardize}};
  if (!shift.empty()) {
    j["standardization"] = {{"shift", shift}, {"scale", scale}};
  }
  j["train"] = windows_json(train);
  j["test"] = windows_json(test);
  return j.dump(2);
}

WindowedRegressionTask make_sinusoid_task(const WindowConfig& config) {
  check_window_config(config);
  if (config.t_fixed + config.t_var >= kSinusoidSamples) {
    throw InputError("window lengths must be shorter than the 1000-sample series");
  }
  Eigen::MatrixXd series(static_cast<Eigen::Index>(kSinusoidSamples), 1);
  Rng noise = Rng::substream(config.seed, "noise");
  for (std::size_t k = 0; k < kSinusoidSamples; ++k) {
    const double clean = std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / kSinusoidSamples);
    const double eps = config.noise_sigma * noise.normal();
    series(static_cast<Eigen::Index>(k), 0) = clean + eps;
  }

  WindowedRegressionTask task;
  task.config = config;
  task.source = "sinusoid";
  task.series_length = kSinusoidSamples;
  task.split_index = 0;
  Rng rng = Rng::substream(config.seed, "windows");
  auto place = [&](std::size_t length, std::size_t& start) {
    start = rng.uniform_int(0, kSinusoidSamples - 1);
    return start + length < kSinusoidSamples;
  };
  task.train = draw_windows(series, config.n_train, config, rng, "train", place);
  task.test = draw_windows(series, config.n_test, config, rng, "test", place);
  return task;
}

Eigen::MatrixXd parse_csv(std::istream& in, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto fields = split_fields(content);
    std::vector<double> values;
    bool numeric = true;
    for (const auto& f : fields) {
      double v = 0.0;
      if (!parse_double(f, v)) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && columns == 0) {
        columns = fields.size();  // header line
        continue;
      }
      throw InputError(origin + ":" + std::to_string(line_no) + ": malformed row '" + content + "'");
    }
    if (columns == 0) columns = values.size();
    if (values.size() != columns) {
      throw InputError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                       " columns, found " + std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) {
    throw InputError(origin + ": no numeric rows");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(columns));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < columns; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return out;
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("cannot open " + path);
  }
  return parse_csv(in, path);
}

std::vector<Sequence> read_sequences(const std::vector<std::string>& paths) {
  std::vector<Sequence> out;
  for (const auto& path : paths) {
    out.emplace_back(read_csv(path), std::filesystem::path(path).stem().string());
  }
  return out;
}

WindowedRegressionTask make_series_task(const Eigen::MatrixXd& raw, std::size_t split_index,
                                        const WindowConfig& config, std::string source) {
  check_window_config(config);
  const auto length = static_cast<std::size_t>(raw.rows());
  if (split_index < 1 || split_index >= length) {
    throw InputError("split index must lie in [1, " + std::to_string(length - 1) + "]");
  }
  if (config.t_fixed >= split_index) {
    throw InputError("no training window fits before the split index");
  }

  WindowedRegressionTask task;
  task.config = config;
  task.source = std::move(source);
  task.series_length = length;
  task.split_index = split_index;
  Eigen::MatrixXd series = raw;
  if (config.standardize) {
    const auto head = raw.topRows(static_cast<Eigen::Index>(split_index));
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
      const double mu = head.col(c).mean();
      const double var = split_index > 1 ? (head.col(c).array() - mu).square().sum() / double(split_index - 1) : 0.0;
      const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
      series.col(c) = (raw.col(c).array() - mu) / sd;
      task.shift.push_back(mu);
      task.scale.push_back(sd);
    }
  }

  Rng rng = Rng::substream(config.seed, "windows");
  task.train = draw_windows(series, config.n_train, config, rng, "train", [&](std::size_t len, std::size_t& start) {
    start = rng.uniform_int(0, split_index - 1);
    return start + len < split_index;
  });
  if (config.n_test > 0) {
    task.test = draw_windows(series, config.n_test, config, rng, "test", [&](std::size_t len, std::size_t& start) {
      const std::size_t target = rng.uniform_int(split_index, length - 1);
      if (target < len) return false;
      start = target - len;
      return true;
    });
  }
  return task;
}

WindowedRegressionTask make_csv_task(const std::string& path, std::size_t split_index, const WindowConfig& config) {
  return make_series_task(read_csv(path), split_index, config, path);
}

std::vector<Sequence> normalize_sequences(const std::vector<Sequence>& dataset) {
  std::vector<Sequence> out;
  out.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double norm = dataset[i].data().norm();
    if (norm == 0.0) {
      throw InputError("sequence " + std::to_string(i + 1) + " is all zero and cannot be normalized");
    }
    out.emplace_back(dataset[i].data() / norm, dataset[i].id());
  }
  return out;
}

}  // namespace rntk
