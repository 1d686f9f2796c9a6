// Copyright 2026 The charrnn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "charrnn/errors.hpp"
#include "charrnn/eval.hpp"

namespace charrnn::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

LossDecay to_decay(const std::string& v) {
  if (v == "none") return LossDecay::kNone;
  if (v == "linear") return LossDecay::kLinear;
  if (v == "exponential") return LossDecay::kExponential;
  throw ConfigError("decay: expected none, linear or exponential, got '" + v + "'");
}

}  // namespace

std::vector<Architecture> parse_architectures(const std::string& text) {
  std::vector<Architecture> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    const auto x = item.find('x');
    if (x == std::string::npos)
      throw ConfigError("bench_architectures: expected entries like 1x128, got '" + item + "'");
    Architecture a{to_count("bench_architectures", item.substr(0, x)),
                   to_count("bench_architectures", item.substr(x + 1))};
    if (a.num_layers == 0 || a.hidden_size == 0)
      throw ConfigError("bench_architectures: counts must be >= 1");
    out.push_back(a);
  }
  if (out.empty()) throw ConfigError("bench_architectures: empty list");
  return out;
}

void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  const std::string& v = value;
  if (key == "dataset") c.dataset = v;
  else if (key == "output_dir") c.output_dir = v;
  else if (key == "scheme") c.train.scheme = parse_scheme(v);
  else if (key == "k1") c.train.k1 = to_count(key, v);
  else if (key == "k2") c.train.k2 = to_count(key, v);
  else if (key == "k3") {
    if (v == "auto") c.train.loss_window.reset();
    else c.train.loss_window = to_count(key, v);
  }
  else if (key == "decay") c.train.decay = to_decay(v);
  else if (key == "lanes") c.train.lanes = to_count(key, v);
  else if (key == "total_batches") c.train.total_batches = to_count(key, v);
  else if (key == "learning_rate") c.train.learning_rate = to_real(key, v);
  else if (key == "clip") c.train.clip = to_real(key, v);
  else if (key == "clip_cell") c.train.clip_cell_gradients = to_bool(key, v);
  else if (key == "seed") c.train.seed = to_u64(key, v);
  else if (key == "adam_beta1") c.adam.beta1 = to_real(key, v);
  else if (key == "adam_beta2") c.adam.beta2 = to_real(key, v);
  else if (key == "adam_epsilon") c.adam.epsilon = to_real(key, v);
  else if (key == "num_layers") c.model.num_layers = to_count(key, v);
  else if (key == "hidden_size") c.model.hidden_size = to_count(key, v);
  else if (key == "dense_size") c.model.dense_size = to_count(key, v);
  else if (key == "leakiness") c.model.leakiness = to_real(key, v);
  else if (key == "rotation_seed") c.rotation_seed = to_u64(key, v);
  else if (key == "test_length") c.test_length = to_count(key, v);
  else if (key == "eval_points") c.eval_points = to_count(key, v);
  else if (key == "precision") {
    if (v != "32" && v != "64") throw ConfigError("precision: expected 32 or 64, got '" + v + "'");
    c.precision = v == "32" ? 32 : 64;
  }
  else if (key == "sampling") {
    if (v != "auto" && v != "windowed" && v != "progressive")
      throw ConfigError("sampling: expected auto, windowed or progressive, got '" + v + "'");
    c.sampling = v;
  }
  else if (key == "mode") {
    if (v == "greedy") c.mode = DrawMode::kGreedy;
    else if (v == "multinomial") c.mode = DrawMode::kMultinomial;
    else throw ConfigError("mode: expected greedy or multinomial, got '" + v + "'");
  }
  else if (key == "bench_warmup") c.bench.warmup = to_count(key, v);
  else if (key == "bench_iters") c.bench.iterations = to_count(key, v);
  else if (key == "bench_sample_tokens") c.bench.sample_tokens = to_count(key, v);
  else if (key == "bench_architectures") c.bench_architectures = parse_architectures(v);
  else if (key == "gradcheck_trials") c.gradcheck_trials = to_count(key, v);
  else if (key == "gradcheck_epsilon") c.gradcheck_epsilon = to_real(key, v);
  else if (key == "gradcheck_tolerance") c.gradcheck_tolerance = to_real(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::validate() const {
  train.validate();
  AdamConfig a = adam;
  a.learning_rate = train.learning_rate;
  a.validate();
  ModelConfig m = model;
  m.vocab_size = m.vocab_size == 0 ? 1 : m.vocab_size;
  m.validate();
  if (test_length == 0) throw ConfigError("test_length must be >= 1");
  if (test_length <= train.k2)
    throw ConfigError("test_length (" + std::to_string(test_length) + ") must exceed k2 (" +
                      std::to_string(train.k2) + ") so perplexity has tokens to score");
  if (eval_points < 2) throw ConfigError("eval_points must be >= 2");
  if (!(gradcheck_epsilon > 0.0)) throw ConfigError("gradcheck_epsilon must be > 0");
  if (!(gradcheck_tolerance > 0.0)) throw ConfigError("gradcheck_tolerance must be > 0");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  RunConfig cfg = parse_config(buffer.str());
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("--override expects key=value, got '" + o + "'");
    apply_setting(cfg, trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
  return cfg;
}

std::string to_config_text(const RunConfig& c) {
  std::ostringstream out;
  auto real = [](double x) { return format_real(x); };
  out << "dataset = " << c.dataset.string() << '\n'
      << "output_dir = " << c.output_dir.string() << '\n'
      << "scheme = " << to_string(c.train.scheme) << '\n'
      << "k1 = " << c.train.k1 << '\n'
      << "k2 = " << c.train.k2 << '\n'
      << "k3 = " << (c.train.loss_window ? std::to_string(*c.train.loss_window) : "auto") << '\n'
      << "decay = " << to_string(c.train.decay) << '\n'
      << "lanes = " << c.train.lanes << '\n'
      << "total_batches = " << c.train.total_batches << '\n'
      << "learning_rate = " << real(c.train.learning_rate) << '\n'
      << "clip = " << real(c.train.clip) << '\n'
      << "clip_cell = " << (c.train.clip_cell_gradients ? "true" : "false") << '\n'
      << "seed = " << c.train.seed << '\n'
      << "adam_beta1 = " << real(c.adam.beta1) << '\n'
      << "adam_beta2 = " << real(c.adam.beta2) << '\n'
      << "adam_epsilon = " << real(c.adam.epsilon) << '\n'
      << "num_layers = " << c.model.num_layers << '\n'
      << "hidden_size = " << c.model.hidden_size << '\n'
      << "dense_size = " << c.model.dense_size << '\n'
      << "leakiness = " << real(c.model.leakiness) << '\n'
      << "rotation_seed = " << c.rotation_seed << '\n'
      << "test_length = " << c.test_length << '\n'
      << "eval_points = " << c.eval_points << '\n'
      << "precision = " << c.precision << '\n'
      << "sampling = " << c.sampling << '\n'
      << "mode = " << to_string(c.mode) << '\n'
      << "bench_warmup = " << c.bench.warmup << '\n'
      << "bench_iters = " << c.bench.iterations << '\n'
      << "bench_sample_tokens = " << c.bench.sample_tokens << '\n';
  out << "bench_architectures = ";
  for (std::size_t i = 0; i < c.bench_architectures.size(); ++i)
    out << (i ? "," : "") << c.bench_architectures[i].num_layers << 'x'
        << c.bench_architectures[i].hidden_size;
  out << '\n'
      << "gradcheck_trials = " << c.gradcheck_trials << '\n'
      << "gradcheck_epsilon = " << real(c.gradcheck_epsilon) << '\n'
      << "gradcheck_tolerance = " << real(c.gradcheck_tolerance) << '\n';
  return out.str();
}

}  // namespace charrnn::cli
