#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bandana/config.hpp"
#include "bandana/graph.hpp"
#include "bandana/probe.hpp"
#include "bandana/split.hpp"
#include "bandana/training.hpp"

namespace bandana::cli {

/// A path to a manifest or dataset directory. A bare name ("cora") that is
/// not a path is looked up under $BANDANA_DATA_DIR and then ./data.
std::filesystem::path resolve_dataset(const std::string& spec);

/// Number of worker threads from $BANDANA_THREADS (default 1).
std::size_t thread_budget();

struct RepeatOutcome {
    std::uint64_t seed = 0;
    TrainHistory history;
    std::optional<LinkMetrics> link;
    std::optional<NodeMetrics> node;
};

struct PipelineTasks {
    bool link = true;
    bool node = true;
};

/// Edge split of repeat `r`: the frozen split file when configured,
/// otherwise a fresh split seeded with split_seed + r.
EdgeSplit repeat_split(const Graph& graph, const RunConfig& config, std::size_t r);

/// Repeat `r` of a run: edge split with split_seed + r, pretraining with
/// seed + r, then the requested probes (link on the split's test edges,
/// node classification with a node split seeded by seed + r).
RepeatOutcome run_repeat(const Graph& graph, const RunConfig& config, std::size_t r, PipelineTasks tasks,
                         ModelParams* params_out = nullptr, EdgeSplit* split_out = nullptr);

/// All repeats, in order. With `parallel`, repeats run on up to
/// thread_budget() threads; results do not depend on the schedule.
std::vector<RepeatOutcome> run_repeats(const Graph& graph, const RunConfig& config, PipelineTasks tasks,
                                       bool parallel);

/// Link and node probes of given parameters.
LinkMetrics probe_link(const ModelParams& params, const Graph& graph, const EdgeSplit& split);
NodeMetrics probe_node(const ModelParams& params, const Graph& graph, const RunConfig& config, std::uint64_t seed);

/// Off-diagonal mean ratio of bandwidth masks on `train`, averaged over
/// `resamples` independent draws of a single layer.
double measured_ratio(const Graph& train, double temperature, std::size_t resamples, std::uint64_t seed);

}  // namespace bandana::cli
