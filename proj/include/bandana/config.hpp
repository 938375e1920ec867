#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandana/training.hpp"

namespace bandana {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a run needs: the training hyperparameters plus data, split,
/// probing and output settings.
struct RunConfig {
    TrainConfig train;
    std::string preset;          // name of the preset applied first, if any
    std::string dataset;         // manifest path or directory
    std::string split_file;      // frozen split to reuse (optional)
    double train_frac = 0.85;
    double val_frac = 0.05;
    std::uint64_t split_seed = 0;
    std::size_t repeats = 1;
    std::string output_dir = "runs";
    double probe_weight_decay = 0.0;
    double node_train_frac = 0.1;
    double node_val_frac = 0.1;
    double label_ratio = 1.0;

    /// Throws std::invalid_argument on the first invalid field.
    void validate() const;
};

/// Hyperparameter sets for the benchmark graphs (cora, citeseer, pubmed,
/// photo, computers, cs, physics).
std::optional<RunConfig> preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const RunConfig& c);

/// Overwrites fields present in `j`; unknown keys are rejected.
void apply_json(const nlohmann::json& j, TrainConfig& c);
void apply_json(const nlohmann::json& j, RunConfig& c);

/// 16 hex digits identifying a configuration (hash of its canonical JSON).
std::string config_hash(const RunConfig& c);

}  // namespace bandana
