#include "semsnet/config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "semsnet/bundle.hpp"
#include "semsnet/errors.hpp"
#include "semsnet/io.hpp"

namespace semsnet {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const auto s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(where + ": expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& where) {
  const auto s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(where + ": expected true or false, got '" + text + "'");
}

/// Walks one section, dispatching each key to its setter.
class SectionReader {
 public:
  SectionReader(std::string source, std::string section) : source_(std::move(source)), section_(std::move(section)) {}

  template <typename T>
  void number(const char* key, T& target) {
    handlers_[key] = [this, &target, key](const std::string& v) { target = parse_number<T>(v, where(key)); };
  }
  void boolean(const char* key, bool& target) {
    handlers_[key] = [this, &target, key](const std::string& v) { target = parse_bool(v, where(key)); };
  }
  void custom(const char* key, std::function<void(const std::string&, const std::string&)> fn) {
    handlers_[key] = [this, fn = std::move(fn), key](const std::string& v) { fn(v, where(key)); };
  }

  void read(const pt::ptree& tree) {
    for (const auto& [key, node] : tree) {
      auto it = handlers_.find(key);
      if (it == handlers_.end()) throw ConfigError(where(key) + ": unknown key");
      it->second(node.get_value<std::string>());
    }
  }

 private:
  std::string where(const std::string& key) const { return source_ + ": [" + section_ + "] " + key; }

  std::string source_;
  std::string section_;
  std::map<std::string, std::function<void(const std::string&)>> handlers_;
};

}  // namespace

std::vector<int> parse_sizes(std::string_view text) {
  std::vector<int> out;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(parse_number<int>(item, "hidden size"));
    if (out.back() < 1) throw ConfigError("hidden sizes must be positive");
  }
  if (out.empty()) throw ConfigError("empty list of hidden sizes");
  return out;
}

std::vector<std::vector<int>> parse_grid(std::string_view text) {
  std::vector<std::vector<int>> grid;
  std::string s(text);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';')) {
    if (trim(item).empty()) continue;
    grid.push_back(parse_sizes(item));
  }
  if (grid.empty()) throw ConfigError("sweep.grid must list at least one architecture");
  return grid;
}

void RunConfig::apply_seed(std::uint64_t root) {
  seed = root;
  pipeline.rng_seed = root;
  pipeline.train.rng_seed = root;
}

void RunConfig::validate() const {
  pipeline.validate();
  synth.validate();
  imv.validate();
  if (sweep_grid.empty()) throw ConfigError("sweep.grid must list at least one architecture");
}

RunConfig parse_config(std::string_view text, std::string_view source) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string(source) + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  RunConfig cfg;
  auto& p = cfg.pipeline;
  const std::string src(source);
  std::map<std::string, SectionReader> sections;

  auto& run = sections.emplace("run", SectionReader(src, "run")).first->second;
  run.number("seed", cfg.seed);

  auto& data = sections.emplace("data", SectionReader(src, "data")).first->second;
  data.number("window_len", p.window_len);
  data.number("num_segments", p.num_segments);

  auto& split = sections.emplace("split", SectionReader(src, "split")).first->second;
  split.number("train_fraction", p.train_fraction);
  split.number("val_fraction", p.val_fraction);
  split.number("test_fraction", p.test_fraction);
  split.number("trials", p.trials);

  auto& eval = sections.emplace("eval", SectionReader(src, "eval")).first->second;
  eval.number("threshold", p.eval.threshold);
  eval.number("scale_max", p.eval.scale_max);

  auto& train = sections.emplace("train", SectionReader(src, "train")).first->second;
  train.number("learning_rate", p.train.learning_rate);
  train.number("epochs", p.train.epochs);
  train.number("iterations_per_epoch", p.train.iterations_per_epoch);
  train.number("beta1", p.train.beta1);
  train.number("beta2", p.train.beta2);
  train.number("epsilon", p.train.epsilon);
  train.number("gradient_clip_norm", p.train.gradient_clip_norm);
  train.boolean("init_bias_to_target_mean", p.train.init_bias_to_target_mean);

  auto& lstm = sections.emplace("lstm", SectionReader(src, "lstm")).first->second;
  lstm.custom("hidden_sizes", [&](const std::string& v, const std::string& where) {
    try {
      p.arch.hidden_sizes = parse_sizes(v);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  });
  lstm.number("dropout_rate", p.arch.dropout_rate);

  auto& svr = sections.emplace("svr", SectionReader(src, "svr")).first->second;
  svr.number("C", p.svr.C);
  svr.number("epsilon", p.svr.epsilon);
  svr.custom("kernel", [&](const std::string& v, const std::string& where) {
    try {
      p.svr.kernel = kernel_from_string(trim(v));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  });
  svr.number("gamma", p.svr.gamma);
  svr.number("tolerance", p.svr.tolerance);
  svr.number("max_iterations", p.svr.max_iterations);
  svr.boolean("tune", p.tune_svr);

  auto& imv = sections.emplace("imv", SectionReader(src, "imv")).first->second;
  imv.number("segment_size", cfg.imv.segment_size);

  auto& synth = sections.emplace("synth", SectionReader(src, "synth")).first->second;
  synth.number("children", cfg.synth.children);
  synth.number("frames", cfg.synth.frames);
  synth.number("sample_period_ms", cfg.synth.sample_period_ms);
  synth.number("scale_max", cfg.synth.scale_max);
  synth.number("noise", cfg.synth.noise);
  synth.custom("mode", [&](const std::string& v, const std::string& where) {
    try {
      cfg.synth.mode = synth_mode_from_string(trim(v));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  });
  synth.number("constant_label", cfg.synth.constant_label);

  auto& sweep = sections.emplace("sweep", SectionReader(src, "sweep")).first->second;
  sweep.custom("grid", [&](const std::string& v, const std::string& where) {
    try {
      cfg.sweep_grid = parse_grid(v);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  });

  for (const auto& [name, node] : tree) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError(src + ": key '" + name + "' must be inside a section");
    }
    auto it = sections.find(name);
    if (it == sections.end()) throw ConfigError(src + ": unknown section [" + name + "]");
    it->second.read(node);
  }
  cfg.apply_seed(cfg.seed);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.string());
}

std::string default_config_ini() {
  const RunConfig d;
  const auto& p = d.pipeline;
  auto sizes = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  std::string grid;
  for (std::size_t i = 0; i < d.sweep_grid.size(); ++i) grid += (i ? ";" : "") + sizes(d.sweep_grid[i]);
  auto num = [](double v) { return format_double(v); };
  std::string out;
  out += "[run]\nseed = " + std::to_string(d.seed) + "\n\n";
  out += "[data]\nwindow_len = " + std::to_string(p.window_len) + "\nnum_segments = " +
         std::to_string(p.num_segments) + "\n\n";
  out += "[split]\ntrain_fraction = " + num(p.train_fraction) + "\nval_fraction = " + num(p.val_fraction) +
         "\ntest_fraction = " + num(p.test_fraction) + "\ntrials = " + std::to_string(p.trials) + "\n\n";
  out += "[eval]\nthreshold = " + num(p.eval.threshold) + "\nscale_max = " + num(p.eval.scale_max) + "\n\n";
  out += "[train]\nlearning_rate = " + num(p.train.learning_rate) + "\nepochs = " + std::to_string(p.train.epochs) +
         "\niterations_per_epoch = " + std::to_string(p.train.iterations_per_epoch) + "\nbeta1 = " +
         num(p.train.beta1) + "\nbeta2 = " + num(p.train.beta2) + "\nepsilon = " + num(p.train.epsilon) +
         "\ngradient_clip_norm = " + num(p.train.gradient_clip_norm) + "\ninit_bias_to_target_mean = " +
         (p.train.init_bias_to_target_mean ? "true" : "false") + "\n\n";
  out += "[lstm]\nhidden_sizes = " + sizes(p.arch.hidden_sizes) + "\ndropout_rate = " + num(p.arch.dropout_rate) +
         "\n\n";
  out += "[svr]\nC = " + num(p.svr.C) + "\nepsilon = " + num(p.svr.epsilon) + "\nkernel = " +
         std::string(to_string(p.svr.kernel)) + "\ngamma = " + num(p.svr.gamma) + "\ntolerance = " +
         num(p.svr.tolerance) + "\nmax_iterations = " + std::to_string(p.svr.max_iterations) + "\ntune = " +
         (p.tune_svr ? "true" : "false") + "\n\n";
  out += "[imv]\nsegment_size = " + std::to_string(d.imv.segment_size) + "\n\n";
  out += "[synth]\nchildren = " + std::to_string(d.synth.children) + "\nframes = " + std::to_string(d.synth.frames) +
         "\nsample_period_ms = " + std::to_string(d.synth.sample_period_ms) + "\nscale_max = " +
         num(d.synth.scale_max) + "\nnoise = " + num(d.synth.noise) + "\nmode = " +
         std::string(to_string(d.synth.mode)) + "\nconstant_label = " + num(d.synth.constant_label) + "\n\n";
  out += "[sweep]\ngrid = " + grid + "\n";
  return out;
}

std::string run_config_json(const RunConfig& cfg) {
  using nlohmann::json;
  json j;
  j["seed"] = cfg.seed;
  j["pipeline"] = json::parse(pipeline_config_json(cfg.pipeline));
  j["synth"] = {{"children", cfg.synth.children},
                {"frames", cfg.synth.frames},
                {"sample_period_ms", cfg.synth.sample_period_ms},
                {"scale_max", cfg.synth.scale_max},
                {"noise", cfg.synth.noise},
                {"mode", std::string(to_string(cfg.synth.mode))},
                {"constant_label", cfg.synth.constant_label}};
  j["imv"] = {{"segment_size", cfg.imv.segment_size}};
  j["sweep_grid"] = cfg.sweep_grid;
  return j.dump(2);
}

}  // namespace semsnet
