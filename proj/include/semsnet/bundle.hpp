#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "semsnet/pipeline.hpp"

namespace semsnet {

inline constexpr int kBundleVersion = 1;

/// Versioned JSON document with the pipeline config, channel stats, LSTM
/// and SVR parameters. Matrices are row-major nested arrays; every double
/// is written in shortest round-trip form, so load(save(m)) is bit-exact.
std::string bundle_to_json(const PipelineModels& models);
PipelineModels bundle_from_json(std::string_view text);

void save_bundle(const std::filesystem::path& path, const PipelineModels& models);
PipelineModels load_bundle(const std::filesystem::path& path);

/// JSON form of the resolved pipeline config (also used in run manifests).
std::string pipeline_config_json(const PipelineConfig& cfg);

}  // namespace semsnet
