#include "semsnet/bundle.hpp"

#include <json.hpp>

#include "semsnet/errors.hpp"
#include "semsnet/io.hpp"

namespace semsnet {
namespace {

using nlohmann::json;

constexpr std::string_view kFormat = "semsnet-bundle";

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw DataError(std::string("bundle: ") + what + " must have " + std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw DataError(std::string("bundle: ") + what + " must have " + std::to_string(cols) + " columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& j, Eigen::Index size, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
    throw DataError(std::string("bundle: ") + what + " must have " + std::to_string(size) + " entries");
  }
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

json config_to_json(const PipelineConfig& c) {
  return {
      {"window_len", c.window_len},
      {"num_segments", c.num_segments},
      {"train_fraction", c.train_fraction},
      {"val_fraction", c.val_fraction},
      {"test_fraction", c.test_fraction},
      {"trials", c.trials},
      {"eval", {{"threshold", c.eval.threshold}, {"scale_max", c.eval.scale_max}}},
      {"train",
       {{"learning_rate", c.train.learning_rate},
        {"epochs", c.train.epochs},
        {"iterations_per_epoch", c.train.iterations_per_epoch},
        {"beta1", c.train.beta1},
        {"beta2", c.train.beta2},
        {"epsilon", c.train.epsilon},
        {"rng_seed", c.train.rng_seed},
        {"gradient_clip_norm", c.train.gradient_clip_norm},
        {"init_bias_to_target_mean", c.train.init_bias_to_target_mean}}},
      {"lstm", {{"hidden_sizes", c.arch.hidden_sizes}, {"dropout_rate", c.arch.dropout_rate}}},
      {"svr",
       {{"C", c.svr.C},
        {"epsilon", c.svr.epsilon},
        {"kernel", std::string(to_string(c.svr.kernel))},
        {"gamma", c.svr.gamma},
        {"tolerance", c.svr.tolerance},
        {"max_iterations", c.svr.max_iterations},
        {"tune", c.tune_svr}}},
      {"rng_seed", c.rng_seed},
  };
}

PipelineConfig config_from_json(const json& j) {
  PipelineConfig c;
  c.window_len = j.at("window_len").get<std::size_t>();
  c.num_segments = j.at("num_segments").get<std::size_t>();
  c.train_fraction = j.at("train_fraction").get<double>();
  c.val_fraction = j.at("val_fraction").get<double>();
  c.test_fraction = j.at("test_fraction").get<double>();
  c.trials = j.at("trials").get<int>();
  const auto& e = j.at("eval");
  c.eval.threshold = e.at("threshold").get<double>();
  c.eval.scale_max = e.at("scale_max").get<double>();
  const auto& t = j.at("train");
  c.train.learning_rate = t.at("learning_rate").get<double>();
  c.train.epochs = t.at("epochs").get<int>();
  c.train.iterations_per_epoch = t.at("iterations_per_epoch").get<int>();
  c.train.beta1 = t.at("beta1").get<double>();
  c.train.beta2 = t.at("beta2").get<double>();
  c.train.epsilon = t.at("epsilon").get<double>();
  c.train.rng_seed = t.at("rng_seed").get<std::uint64_t>();
  c.train.gradient_clip_norm = t.at("gradient_clip_norm").get<double>();
  c.train.init_bias_to_target_mean = t.at("init_bias_to_target_mean").get<bool>();
  const auto& l = j.at("lstm");
  c.arch.hidden_sizes = l.at("hidden_sizes").get<std::vector<int>>();
  c.arch.dropout_rate = l.at("dropout_rate").get<double>();
  const auto& s = j.at("svr");
  c.svr.C = s.at("C").get<double>();
  c.svr.epsilon = s.at("epsilon").get<double>();
  c.svr.kernel = kernel_from_string(s.at("kernel").get<std::string>());
  c.svr.gamma = s.at("gamma").get<double>();
  c.svr.tolerance = s.at("tolerance").get<double>();
  c.svr.max_iterations = s.at("max_iterations").get<long>();
  c.tune_svr = s.at("tune").get<bool>();
  c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return c;
}

json triple(const SvrInput& v) { return json::array({v[0], v[1], v[2]}); }

SvrInput triple_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw DataError(std::string("bundle: ") + what + " must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

std::string pipeline_config_json(const PipelineConfig& cfg) { return config_to_json(cfg).dump(2); }

std::string bundle_to_json(const PipelineModels& m) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kBundleVersion;
  doc["config"] = config_to_json(m.config);

  json stats;
  stats["channels"] = json::array();
  for (auto name : kChannelNames) stats["channels"].push_back(std::string(name));
  stats["mean"] = json(std::vector<double>(m.stats.mean.begin(), m.stats.mean.end()));
  stats["std"] = json(std::vector<double>(m.stats.stddev.begin(), m.stats.stddev.end()));
  doc["channel_stats"] = std::move(stats);

  json lstm;
  lstm["input_size"] = m.lstm.input_size();
  lstm["dropout_rate"] = m.lstm.dropout_rate;
  lstm["gate_order"] = json::array({"input", "forget", "output", "candidate"});
  lstm["layers"] = json::array();
  for (const auto& layer : m.lstm.layers) {
    lstm["layers"].push_back({{"hidden_size", layer.hidden_size()},
                              {"W", matrix_to_json(layer.W)},
                              {"U", matrix_to_json(layer.U)},
                              {"b", vector_to_json(layer.b)}});
  }
  lstm["dense_w"] = vector_to_json(m.lstm.dense_w);
  lstm["dense_b"] = m.lstm.dense_b;
  doc["lstm"] = std::move(lstm);

  json svr;
  svr["kernel"] = std::string(to_string(m.svr.kernel));
  svr["gamma"] = m.svr.gamma;
  svr["C"] = m.svr.C;
  svr["epsilon"] = m.svr.epsilon;
  svr["bias"] = m.svr.bias;
  svr["feature_mean"] = triple(m.svr.feature_mean);
  svr["feature_std"] = triple(m.svr.feature_std);
  svr["support_vectors"] = json::array();
  for (const auto& sv : m.svr.support_vectors) svr["support_vectors"].push_back(triple(sv));
  svr["dual_coef"] = json(m.svr.dual_coef);
  doc["svr"] = std::move(svr);
  return doc.dump(1) + "\n";
}

PipelineModels bundle_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("bundle: invalid JSON: ") + e.what());
  }
  try {
    if (doc.value("format", "") != kFormat) throw DataError("bundle: not a semsnet bundle");
    const int version = doc.at("version").get<int>();
    if (version != kBundleVersion) {
      throw DataError("bundle: unsupported version " + std::to_string(version));
    }
    PipelineModels m;
    m.config = config_from_json(doc.at("config"));

    const auto& stats = doc.at("channel_stats");
    const auto mean = vector_from_json(stats.at("mean"), kNumChannels, "channel_stats.mean");
    const auto sd = vector_from_json(stats.at("std"), kNumChannels, "channel_stats.std");
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      m.stats.mean[c] = mean[static_cast<Eigen::Index>(c)];
      m.stats.stddev[c] = sd[static_cast<Eigen::Index>(c)];
      if (!(m.stats.stddev[c] > 0.0)) throw DataError("bundle: channel_stats.std must be positive");
    }

    const auto& lstm = doc.at("lstm");
    m.lstm.dropout_rate = lstm.at("dropout_rate").get<double>();
    auto in = lstm.at("input_size").get<Eigen::Index>();
    for (const auto& lj : lstm.at("layers")) {
      const auto H = lj.at("hidden_size").get<Eigen::Index>();
      LSTMLayerParams p;
      p.W = matrix_from_json(lj.at("W"), 4 * H, in, "lstm W");
      p.U = matrix_from_json(lj.at("U"), 4 * H, H, "lstm U");
      p.b = vector_from_json(lj.at("b"), 4 * H, "lstm b");
      m.lstm.layers.push_back(std::move(p));
      in = H;
    }
    m.lstm.dense_w = vector_from_json(lstm.at("dense_w"), in, "lstm dense_w");
    m.lstm.dense_b = lstm.at("dense_b").get<double>();
    m.lstm.check();

    const auto& svr = doc.at("svr");
    m.svr.kernel = kernel_from_string(svr.at("kernel").get<std::string>());
    m.svr.gamma = svr.at("gamma").get<double>();
    m.svr.C = svr.at("C").get<double>();
    m.svr.epsilon = svr.at("epsilon").get<double>();
    m.svr.bias = svr.at("bias").get<double>();
    m.svr.feature_mean = triple_from(svr.at("feature_mean"), "svr.feature_mean");
    m.svr.feature_std = triple_from(svr.at("feature_std"), "svr.feature_std");
    for (const auto& sv : svr.at("support_vectors")) m.svr.support_vectors.push_back(triple_from(sv, "svr support vector"));
    m.svr.dual_coef = svr.at("dual_coef").get<std::vector<double>>();
    if (m.svr.dual_coef.size() != m.svr.support_vectors.size()) {
      throw DataError("bundle: svr dual_coef and support_vectors differ in length");
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("bundle: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("bundle: ") + e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const PipelineModels& models) {
  write_file_atomic(path, bundle_to_json(models));
}

PipelineModels load_bundle(const std::filesystem::path& path) {
  try {
    return bundle_from_json(read_file(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace semsnet
