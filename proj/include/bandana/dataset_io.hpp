#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "bandana/graph.hpp"

namespace bandana {

/// Malformed or missing dataset input; the message carries file and line.
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LoadedDataset {
    Graph graph;
    Graph::BuildReport report;
    std::filesystem::path manifest;
};

/// Loads a dataset from a manifest file, or from `dir/manifest.json` when
/// given a directory.
///
/// Manifest: {"name": str, "edges": path, "features": path | "identity",
/// "labels": path | null, "num_nodes": int (optional)}. Relative paths are
/// resolved against the manifest's directory. Edges are symmetrized and
/// deduplicated; self-loops are dropped and counted in the report.
LoadedDataset load_dataset(const std::filesystem::path& manifest_path);

/// Writes manifest.json, edges.txt, features.csv (or "identity") and
/// labels.txt into `dir`. Returns the manifest path.
std::filesystem::path write_dataset(const Graph& graph, const std::filesystem::path& dir);

struct DatasetStats {
    std::size_t nodes = 0;
    std::size_t directed_edges = 0;
    std::size_t features = 0;
    std::size_t classes = 0;
    double density_permille = 0.0;
};

DatasetStats dataset_stats(const Graph& graph);

/// True when the features are exactly the identity matrix.
bool has_identity_features(const Graph& graph);

}  // namespace bandana
