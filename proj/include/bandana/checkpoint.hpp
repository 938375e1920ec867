#pragma once

#include <filesystem>

#include <json.hpp>

#include "bandana/model.hpp"

namespace bandana {

struct Checkpoint {
    ModelParams params;
    nlohmann::json config;  // run configuration echo
    bool has_decoder = true;
};

/// JSON {"version", "config", "model": {dims...}, "params": {path: {"shape",
/// "data"}}}. Values round-trip exactly.
void save_checkpoint(const ModelParams& params, const nlohmann::json& config, const std::filesystem::path& path);

/// Loads a checkpoint. Decoder tensors may be absent (has_decoder = false,
/// decoder zero-filled); every encoder tensor must be present with the
/// shape implied by the stored dimensions.
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::json model_config_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace bandana
