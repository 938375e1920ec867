#include "bandana/split.hpp"

#include "bandana/log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include <json.hpp>

namespace bandana {

namespace {

std::uint64_t pair_key(Edge e) {
    e = canonical(e);
    return (static_cast<std::uint64_t>(e.u) << 32) | e.v;
}

}  // namespace

EdgeSplit split_edges(const Graph& graph, double train_frac, double val_frac, std::uint64_t seed) {
    if (!(train_frac > 0.0 && train_frac < 1.0) || !(val_frac > 0.0 && val_frac < 1.0) ||
        train_frac + val_frac >= 1.0) {
        throw std::invalid_argument("split_edges: fractions must lie in (0, 1) and sum below 1");
    }
    std::vector<Edge> edges = graph.undirected_edges();
    const std::size_t total = edges.size();
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(total)));
    const auto n_val = static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(total)));
    if (n_train == 0 || n_val == 0 || n_train + n_val >= total) {
        throw std::invalid_argument("split_edges: " + std::to_string(total) +
                                    " edges are too few to populate train, val and test");
    }
    Rng rng = Rng::derive(seed, "edge-split");
    for (std::size_t i = total; i > 1; --i) std::swap(edges[i - 1], edges[rng.uniform_index(i)]);

    EdgeSplit s;
    s.seed = seed;
    s.train_pos.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_train),
                     edges.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test_pos.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), edges.end());
    for (auto* list : {&s.train_pos, &s.val_pos, &s.test_pos}) std::sort(list->begin(), list->end());

    // nearly complete graphs cannot supply |pos| negatives; take what exists
    const std::size_t n = graph.num_nodes();
    const std::size_t non_edges = n * (n - 1) / 2 - total;
    const std::size_t n_val_neg = std::min(s.val_pos.size(), non_edges);
    const std::size_t n_test_neg = std::min(s.test_pos.size(), non_edges - n_val_neg);
    if (n_val_neg < s.val_pos.size() || n_test_neg < s.test_pos.size()) {
        logging::warn("split_edges: only " + std::to_string(non_edges) + " non-edges; negative sets truncated");
    }
    Rng neg = Rng::derive(seed, "eval-negatives");
    s.val_neg = sample_negative_edges(graph, n_val_neg, {}, neg);
    s.test_neg = sample_negative_edges(graph, n_test_neg, s.val_neg, neg);
    return s;
}

std::vector<Edge> sample_negative_edges(const Graph& graph, std::size_t count,
                                        std::span<const Edge> exclude, Rng& rng) {
    const std::size_t n = graph.num_nodes();
    std::unordered_set<std::uint64_t> blocked;
    blocked.reserve(exclude.size() * 2 + 16);
    for (const Edge& e : exclude) {
        if (e.u != e.v && !graph.has_edge(e.u, e.v)) blocked.insert(pair_key(e));
    }
    const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
    const std::size_t available = all_pairs - graph.num_edges() - blocked.size();
    if (count > available) {
        throw std::invalid_argument("sample_negative_edges: requested " + std::to_string(count) +
                                    " pairs but only " + std::to_string(available) + " non-edges exist");
    }
    std::vector<Edge> out;
    out.reserve(count);
    if (count == 0) return out;

    if (2 * count <= available) {
        // sparse regime: sequential rejection, each accepted pair is uniform
        // over the pairs not yet taken
        std::unordered_set<std::uint64_t> taken;
        taken.reserve(count * 2);
        while (out.size() < count) {
            const auto u = static_cast<NodeId>(rng.uniform_index(n));
            const auto v = static_cast<NodeId>(rng.uniform_index(n));
            if (u == v || graph.has_edge(u, v)) continue;
            const Edge e = canonical({u, v});
            const std::uint64_t key = pair_key(e);
            if (blocked.count(key) || !taken.insert(key).second) continue;
            out.push_back(e);
        }
        return out;
    }
    std::vector<Edge> pool;
    pool.reserve(available);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v) {
            const Edge e{static_cast<NodeId>(u), static_cast<NodeId>(v)};
            if (!graph.has_edge(u, v) && !blocked.count(pair_key(e))) pool.push_back(e);
        }
    for (std::size_t i = 0; i < count; ++i) {
        std::swap(pool[i], pool[i + rng.uniform_index(pool.size() - i)]);
        out.push_back(pool[i]);
    }
    return out;
}

std::vector<Edge> sample_negative_edges(const Graph& graph, std::size_t count,
                                        std::span<const Edge> exclude, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, "negatives");
    return sample_negative_edges(graph, count, exclude, rng);
}

Graph train_graph(const Graph& graph, const EdgeSplit& split) {
    return graph.with_edges(split.train_pos);
}

namespace {

nlohmann::json edges_to_json(const std::vector<Edge>& edges) {
    auto arr = nlohmann::json::array();
    for (const Edge& e : edges) arr.push_back({e.u, e.v});
    return arr;
}

std::vector<Edge> edges_from_json(const nlohmann::json& arr) {
    std::vector<Edge> out;
    out.reserve(arr.size());
    for (const auto& p : arr) out.push_back({p.at(0).get<NodeId>(), p.at(1).get<NodeId>()});
    return out;
}

}  // namespace

void write_split(const EdgeSplit& split, const std::filesystem::path& path) {
    nlohmann::json j;
    j["seed"] = split.seed;
    j["train_pos"] = edges_to_json(split.train_pos);
    j["val_pos"] = edges_to_json(split.val_pos);
    j["test_pos"] = edges_to_json(split.test_pos);
    j["val_neg"] = edges_to_json(split.val_neg);
    j["test_neg"] = edges_to_json(split.test_neg);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write split");
    out << j.dump() << '\n';
}

EdgeSplit read_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open split file");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": invalid split JSON: " + e.what());
    }
    EdgeSplit s;
    s.seed = j.at("seed").get<std::uint64_t>();
    s.train_pos = edges_from_json(j.at("train_pos"));
    s.val_pos = edges_from_json(j.at("val_pos"));
    s.test_pos = edges_from_json(j.at("test_pos"));
    s.val_neg = edges_from_json(j.at("val_neg"));
    s.test_neg = edges_from_json(j.at("test_neg"));
    return s;
}

}  // namespace bandana
