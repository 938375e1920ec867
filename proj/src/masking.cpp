#include "bandana/masking.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "bandana/autograd.hpp"

namespace bandana {

std::string to_string(MaskKind kind) {
    switch (kind) {
        case MaskKind::bandwidth: return "bandwidth";
        case MaskKind::bernoulli: return "bernoulli";
        case MaskKind::uniform: return "uniform";
        case MaskKind::truncgauss: return "truncgauss";
    }
    return "?";
}

std::optional<MaskKind> parse_mask_kind(std::string_view name) {
    if (name == "bandwidth" || name == "boltzmann-gibbs") return MaskKind::bandwidth;
    if (name == "bernoulli") return MaskKind::bernoulli;
    if (name == "uniform") return MaskKind::uniform;
    if (name == "truncgauss") return MaskKind::truncgauss;
    return std::nullopt;
}

SparseMatrix self_looped_pattern(const Graph& graph, Real fill) {
    SparseMatrix s = graph.adjacency(true);
    std::fill(s.values.begin(), s.values.end(), fill);
    return s;
}

namespace {

void check_layers(std::size_t num_layers) {
    if (num_layers == 0) throw std::invalid_argument("mask sampling: need at least one layer");
}

void check_continuous_ratio(double p, const char* who) {
    if (!(p > 0.5 && p < 1.0)) {
        throw std::invalid_argument(std::string(who) + ": mask ratio p must lie in (0.5, 1)");
    }
}

// Fills the off-diagonal slots of every row from `draw`, diagonal with 1.
template <typename Draw>
MaskSet edgewise(const Graph& graph, std::size_t num_layers, MaskKind kind, double p, Draw draw) {
    check_layers(num_layers);
    MaskSet set;
    set.kind = kind;
    set.p = p;
    const SparseMatrix pattern = self_looped_pattern(graph);
    for (std::size_t k = 0; k < num_layers; ++k) {
        SparseMatrix layer = pattern;
        for (std::size_t j = 0; j < layer.rows; ++j)
            for (std::size_t s = layer.row_offsets[j]; s < layer.row_offsets[j + 1]; ++s)
                layer.values[s] = layer.col_indices[s] == j ? 1.0 : draw();
        set.layers.push_back(std::move(layer));
    }
    return set;
}

}  // namespace

MaskSet sample_bandwidth_masks(const Graph& graph, double temperature, std::size_t num_layers, Rng& rng) {
    if (!(temperature > 0.0)) throw std::invalid_argument("bandwidth masks: temperature must be positive");
    check_layers(num_layers);
    MaskSet set;
    set.kind = MaskKind::bandwidth;
    set.temperature = temperature;
    const SparseMatrix pattern = self_looped_pattern(graph);
    const std::size_t n = graph.num_nodes();

    // groups are the in-neighbour lists (graph CSR rows); isolated nodes
    // form no group and keep their diagonal at 1
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> slot_of;  // softmax position -> mask slot
    slot_of.reserve(graph.num_directed_entries());
    std::vector<std::size_t> isolated_diag;
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t s = pattern.row_offsets[j]; s < pattern.row_offsets[j + 1]; ++s) {
            if (pattern.col_indices[s] == j) {
                if (graph.degree(j) == 0) isolated_diag.push_back(s);
            } else {
                slot_of.push_back(s);
            }
        }
        if (graph.degree(j) > 0) offsets.push_back(slot_of.size());
    }
    std::vector<Real> scores(slot_of.size());
    for (std::size_t k = 0; k < num_layers; ++k) {
        for (Real& v : scores) v = rng.normal();
        const std::vector<Real> probs = grouped_softmax(scores, offsets, temperature);
        SparseMatrix layer = pattern;
        for (std::size_t q = 0; q < slot_of.size(); ++q) layer.values[slot_of[q]] = probs[q];
        for (std::size_t s : isolated_diag) layer.values[s] = 1.0;
        set.layers.push_back(std::move(layer));
    }
    return set;
}

MaskSet sample_bernoulli_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli masks: p must lie in [0, 1]");
    check_layers(num_layers);
    MaskSet set;
    set.kind = MaskKind::bernoulli;
    set.p = p;
    const SparseMatrix pattern = self_looped_pattern(graph);
    const std::vector<std::size_t> mirror = transpose_slots(pattern);
    for (std::size_t k = 0; k < num_layers; ++k) {
        SparseMatrix layer = pattern;
        for (std::size_t j = 0; j < layer.rows; ++j) {
            for (std::size_t s = layer.row_offsets[j]; s < layer.row_offsets[j + 1]; ++s) {
                const std::size_t i = layer.col_indices[s];
                if (i == j) {
                    layer.values[s] = 1.0;
                } else if (i < j) {
                    // one coin per undirected edge, visited from its upper slot
                    const Real keep = rng.bernoulli(p) ? 0.0 : 1.0;
                    layer.values[s] = keep;
                    layer.values[mirror[s]] = keep;
                }
            }
        }
        set.layers.push_back(std::move(layer));
    }
    return set;
}

MaskSet sample_uniform_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng) {
    check_continuous_ratio(p, "uniform masks");
    const double hi = 2.0 - 2.0 * p;
    return edgewise(graph, num_layers, MaskKind::uniform, p, [&] { return rng.uniform(0.0, hi); });
}

MaskSet sample_truncgauss_masks(const Graph& graph, double p, std::size_t num_layers, Rng& rng) {
    check_continuous_ratio(p, "truncated-gaussian masks");
    const double hi = 2.0 - 2.0 * p;
    const double mu = 1.0 - p;
    return edgewise(graph, num_layers, MaskKind::truncgauss, p, [&] {
        while (true) {
            const double x = rng.normal(mu, 1.0);
            if (x >= 0.0 && x <= hi) return x;
        }
    });
}

MaskSet sample_masks(MaskKind kind, const Graph& graph, double param, std::size_t num_layers, Rng& rng) {
    switch (kind) {
        case MaskKind::bandwidth: return sample_bandwidth_masks(graph, param, num_layers, rng);
        case MaskKind::bernoulli: return sample_bernoulli_masks(graph, param, num_layers, rng);
        case MaskKind::uniform: return sample_uniform_masks(graph, param, num_layers, rng);
        case MaskKind::truncgauss: return sample_truncgauss_masks(graph, param, num_layers, rng);
    }
    throw std::invalid_argument("sample_masks: unknown kind");
}

SparseMatrix perturbed_adjacency(const Graph& graph, const SparseMatrix& mask_layer) {
    const SparseMatrix pattern = graph.adjacency(true);
    if (!pattern.same_pattern(mask_layer)) {
        throw std::invalid_argument("perturbed_adjacency: mask pattern differs from A + I");
    }
    SparseMatrix out = mask_layer;
    for (std::size_t j = 0; j < out.rows; ++j)
        for (std::size_t s = out.row_offsets[j]; s < out.row_offsets[j + 1]; ++s)
            if (out.col_indices[s] == j) out.values[s] = 1.0;
    return out;
}

double calculated_mask_ratio(std::size_t num_nodes, std::size_t num_train_edges) {
    if (num_train_edges == 0) throw std::invalid_argument("calculated_mask_ratio: empty training edge set");
    return 1.0 - static_cast<double>(num_nodes) / (2.0 * static_cast<double>(num_train_edges));
}

double calculated_mask_ratio(const Graph& graph, std::span<const Edge> train_edges) {
    return calculated_mask_ratio(graph.num_nodes(), train_edges.size());
}

double mean_edge_value(const SparseMatrix& layer) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < layer.rows; ++j)
        for (std::size_t s = layer.row_offsets[j]; s < layer.row_offsets[j + 1]; ++s)
            if (layer.col_indices[s] != j) {
                total += layer.values[s];
                ++count;
            }
    if (count == 0) throw std::invalid_argument("mean_edge_value: mask has no edge slots");
    return total / static_cast<double>(count);
}

double measured_mask_ratio(const MaskSet& masks) {
    if (masks.kind != MaskKind::bandwidth) {
        throw std::invalid_argument("measured_mask_ratio: defined for bandwidth masks only");
    }
    if (masks.layers.empty()) throw std::invalid_argument("measured_mask_ratio: no layers");
    double acc = 0.0;
    for (const auto& layer : masks.layers) acc += 1.0 - mean_edge_value(layer);
    return acc / static_cast<double>(masks.layers.size());
}

void write_mask_csv(const MaskSet& masks, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write mask dump");
    out << "src,dst,layer,value\n" << std::setprecision(10);
    for (std::size_t k = 0; k < masks.layers.size(); ++k) {
        const auto& layer = masks.layers[k];
        for (std::size_t j = 0; j < layer.rows; ++j)
            for (std::size_t s = layer.row_offsets[j]; s < layer.row_offsets[j + 1]; ++s)
                out << layer.col_indices[s] << ',' << j << ',' << k << ',' << layer.values[s] << '\n';
    }
}

}  // namespace bandana
