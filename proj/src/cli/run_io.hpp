#pragma once

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "bandana/config.hpp"
#include "bandana/diagnostics.hpp"
#include "bandana/metrics.hpp"
#include "bandana/probe.hpp"

namespace bandana::cli {

/// {"version", "config_hash", "config"} block embedded in every artifact.
nlohmann::json provenance(const RunConfig& config);

void write_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json to_json(const MeanStd& m);
nlohmann::json to_json(const LinkMetrics& m);
nlohmann::json to_json(const NodeMetrics& m);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const Components& c);

/// "0.9571 ± 0.0012"
std::string format_mean_std(const MeanStd& m, int digits = 4);

/// CSV with header "lo,hi,count".
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);

}  // namespace bandana::cli
