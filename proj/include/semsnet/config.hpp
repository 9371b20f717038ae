#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "semsnet/imv.hpp"
#include "semsnet/pipeline.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet {

/// Everything a CLI command can be configured with.
///
/// INI sections and keys (all optional; defaults shown by `default_config_ini`):
///   [run]    seed
///   [data]   window_len num_segments
///   [split]  train_fraction val_fraction test_fraction trials
///   [eval]   threshold scale_max
///   [train]  learning_rate epochs iterations_per_epoch beta1 beta2 epsilon
///            gradient_clip_norm init_bias_to_target_mean
///   [lstm]   hidden_sizes (comma list) dropout_rate
///   [svr]    C epsilon kernel gamma tolerance max_iterations tune
///   [imv]    segment_size
///   [synth]  children frames sample_period_ms scale_max noise mode constant_label
///   [sweep]  grid (architectures separated by ';', sizes by ',')
struct RunConfig {
  std::uint64_t seed = 42;
  PipelineConfig pipeline;
  SynthConfig synth;
  IMVArch imv;
  std::vector<std::vector<int>> sweep_grid{{80}, {100}, {120}, {70, 40}, {70, 50}, {80, 50}};

  /// Copies `seed` into every component seed.
  void apply_seed(std::uint64_t root);
  void validate() const;
};

/// Parses INI text. Unknown sections or keys and malformed values throw
/// ConfigError naming `source`, the section and the key.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

std::string default_config_ini();
/// Resolved snapshot as a JSON object.
std::string run_config_json(const RunConfig& cfg);

std::vector<std::vector<int>> parse_grid(std::string_view text);
std::vector<int> parse_sizes(std::string_view text);

}  // namespace semsnet
