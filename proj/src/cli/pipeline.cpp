#include "pipeline.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "bandana/dataset_io.hpp"
#include "bandana/masking.hpp"
#include "bandana/split.hpp"

namespace bandana::cli {

namespace fs = std::filesystem;

fs::path resolve_dataset(const std::string& spec) {
    if (spec.empty()) throw DatasetError("no dataset given (use --dataset)");
    const fs::path direct(spec);
    if (fs::exists(direct)) return direct;
    const bool bare = direct.filename() == direct && direct.extension().empty();
    if (bare) {
        std::vector<fs::path> roots;
        if (const char* env = std::getenv("BANDANA_DATA_DIR"); env && *env) roots.emplace_back(env);
        roots.emplace_back("data");
        for (const auto& root : roots) {
            const fs::path candidate = root / spec;
            if (fs::exists(candidate / "manifest.json")) return candidate;
        }
    }
    throw DatasetError(spec + ": dataset not found (looked for a path, then $BANDANA_DATA_DIR/" + spec +
                       " and data/" + spec + ")");
}

std::size_t thread_budget() {
    if (const char* env = std::getenv("BANDANA_THREADS"); env && *env) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

LinkMetrics probe_link(const ModelParams& params, const Graph& graph, const EdgeSplit& split) {
    const Graph tg = train_graph(graph, split);
    return dot_product_probe(link_embeddings(params, tg), split.test_pos, split.test_neg);
}

NodeMetrics probe_node(const ModelParams& params, const Graph& graph, const RunConfig& config, std::uint64_t seed) {
    if (!graph.labels()) throw std::invalid_argument("node probe: dataset has no labels");
    const Matrix z = node_embeddings(params, graph);
    const NodeSplit ns = node_split(graph.num_nodes(), config.node_train_frac, config.node_val_frac,
                                    config.label_ratio, seed);
    LinearProbeConfig pc;
    pc.weight_decay = config.probe_weight_decay;
    pc.seed = seed;
    return linear_probe(z, *graph.labels(), ns, pc);
}

EdgeSplit repeat_split(const Graph& graph, const RunConfig& config, std::size_t r) {
    // a frozen split file is shared by every repeat
    if (!config.split_file.empty()) return read_split(config.split_file);
    return split_edges(graph, config.train_frac, config.val_frac, config.split_seed + r);
}

RepeatOutcome run_repeat(const Graph& graph, const RunConfig& config, std::size_t r, PipelineTasks tasks,
                         ModelParams* params_out, EdgeSplit* split_out) {
    RepeatOutcome out;
    out.seed = config.train.seed + r;
    const EdgeSplit split = repeat_split(graph, config, r);
    TrainConfig tc = config.train;
    tc.seed = out.seed;
    TrainResult res = pretrain(graph, split, tc);
    out.history = res.history;
    if (tasks.link) out.link = probe_link(res.params, graph, split);
    if (tasks.node) out.node = probe_node(res.params, graph, config, out.seed);
    if (params_out) *params_out = std::move(res.params);
    if (split_out) *split_out = split;
    return out;
}

std::vector<RepeatOutcome> run_repeats(const Graph& graph, const RunConfig& config, PipelineTasks tasks,
                                       bool parallel) {
    std::vector<RepeatOutcome> out(config.repeats);
    const std::size_t workers = parallel ? std::min(thread_budget(), config.repeats) : 1;
    if (workers <= 1) {
        for (std::size_t r = 0; r < config.repeats; ++r) out[r] = run_repeat(graph, config, r, tasks);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t r = next++; r < config.repeats; r = next++) {
                try {
                    out[r] = run_repeat(graph, config, r, tasks);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

double measured_ratio(const Graph& train, double temperature, std::size_t resamples, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, "mask-ratio");
    double acc = 0.0;
    for (std::size_t s = 0; s < resamples; ++s) acc += measured_mask_ratio(sample_bandwidth_masks(train, temperature, 1, rng));
    return acc / static_cast<double>(resamples);
}

}  // namespace bandana::cli
