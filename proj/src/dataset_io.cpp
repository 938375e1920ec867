#include "bandana/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "bandana/log.hpp"

namespace bandana {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string where(const fs::path& file, std::size_t line) {
    return file.string() + ":" + std::to_string(line) + ": ";
}

std::ifstream open_input(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw DatasetError(file.string() + ": cannot open file");
    return in;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    token = trim(token);
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

struct RawEdge {
    Edge edge;
    std::size_t line;
};

std::vector<RawEdge> read_edge_list(const fs::path& file) {
    auto in = open_input(file);
    std::vector<RawEdge> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        std::istringstream tokens{std::string(s)};
        std::string a, b, extra;
        tokens >> a >> b;
        std::uint64_t u = 0, v = 0;
        if (b.empty() || (tokens >> extra) || !parse_number(a, u) || !parse_number(b, v)) {
            throw DatasetError(where(file, lineno) + "expected two non-negative node indices");
        }
        if (u > std::numeric_limits<NodeId>::max() || v > std::numeric_limits<NodeId>::max()) {
            throw DatasetError(where(file, lineno) + "node index too large");
        }
        edges.push_back({{static_cast<NodeId>(u), static_cast<NodeId>(v)}, lineno});
    }
    return edges;
}

Matrix read_features(const fs::path& file) {
    auto in = open_input(file);
    std::vector<double> values;
    std::size_t cols = 0, rows = 0, lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty()) continue;
        std::size_t count = 0, start = 0;
        while (true) {
            const std::size_t comma = s.find(',', start);
            const std::string_view cell =
                s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
            double v = 0.0;
            if (!parse_number(cell, v)) {
                throw DatasetError(where(file, lineno) + "non-numeric feature cell '" +
                                   std::string(trim(cell)) + "' in column " + std::to_string(count + 1));
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (rows == 0) cols = count;
        if (count != cols) {
            throw DatasetError(where(file, lineno) + "expected " + std::to_string(cols) +
                               " feature columns, found " + std::to_string(count));
        }
        ++rows;
    }
    return Matrix(rows, cols, std::move(values));
}

std::vector<int> read_labels(const fs::path& file) {
    auto in = open_input(file);
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string_view s = trim(line);
        if (s.empty()) continue;
        int y = 0;
        if (!parse_number(s, y) || y < 0) {
            throw DatasetError(where(file, lineno) + "expected a non-negative integer label");
        }
        labels.push_back(y);
    }
    return labels;
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

LoadedDataset load_dataset(const fs::path& manifest_path) {
    fs::path manifest = manifest_path;
    if (fs::is_directory(manifest)) manifest /= "manifest.json";
    if (!fs::exists(manifest)) throw DatasetError(manifest.string() + ": manifest not found");
    json doc;
    try {
        std::ifstream in(manifest);
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw DatasetError(manifest.string() + ": invalid manifest JSON: " + e.what());
    }
    const fs::path base = manifest.parent_path();
    if (!doc.contains("edges") || !doc["edges"].is_string()) {
        throw DatasetError(manifest.string() + ": manifest needs an \"edges\" path");
    }
    const std::string name = doc.value("name", manifest.parent_path().filename().string());
    const fs::path edge_file = resolve(base, doc["edges"].get<std::string>());
    const auto raw = read_edge_list(edge_file);

    std::optional<std::vector<int>> labels;
    fs::path label_file;
    if (doc.contains("labels") && !doc["labels"].is_null()) {
        label_file = resolve(base, doc["labels"].get<std::string>());
        labels = read_labels(label_file);
    }

    const std::string feature_spec = doc.value("features", std::string("identity"));
    Matrix features;
    std::size_t n = 0;
    if (feature_spec == "identity") {
        if (doc.contains("num_nodes")) {
            n = doc["num_nodes"].get<std::size_t>();
        } else {
            for (const auto& r : raw) n = std::max<std::size_t>(n, std::max(r.edge.u, r.edge.v) + 1);
            if (labels) n = std::max(n, labels->size());
        }
    } else {
        features = read_features(resolve(base, feature_spec));
        n = features.rows();
        if (doc.contains("num_nodes") && doc["num_nodes"].get<std::size_t>() != n) {
            throw DatasetError(resolve(base, feature_spec).string() + ": feature row count " +
                               std::to_string(n) + " does not match num_nodes " +
                               std::to_string(doc["num_nodes"].get<std::size_t>()));
        }
    }
    if (labels && labels->size() != n) {
        throw DatasetError(label_file.string() + ": " + std::to_string(labels->size()) +
                           " labels for " + std::to_string(n) + " nodes");
    }
    std::vector<Edge> edges;
    edges.reserve(raw.size());
    for (const auto& r : raw) {
        if (r.edge.u >= n || r.edge.v >= n) {
            throw DatasetError(where(edge_file, r.line) + "node index out of range for " +
                               std::to_string(n) + " nodes");
        }
        edges.push_back(r.edge);
    }
    if (feature_spec == "identity") features = Matrix::identity(n);

    LoadedDataset out;
    out.graph = Graph::from_edges(n, edges, std::move(features), std::move(labels), name, &out.report);
    out.manifest = manifest;
    if (out.report.self_loops_dropped > 0) {
        logging::warn(edge_file.string() + ": dropped " + std::to_string(out.report.self_loops_dropped) +
                  " self-loop(s)");
    }
    return out;
}

bool has_identity_features(const Graph& graph) {
    const Matrix& f = graph.features();
    if (f.rows() != f.cols()) return false;
    for (std::size_t r = 0; r < f.rows(); ++r)
        for (std::size_t c = 0; c < f.cols(); ++c)
            if (f(r, c) != (r == c ? 1.0 : 0.0)) return false;
    return true;
}

fs::path write_dataset(const Graph& graph, const fs::path& dir) {
    fs::create_directories(dir);
    json manifest;
    manifest["name"] = graph.name();
    manifest["edges"] = "edges.txt";
    manifest["num_nodes"] = graph.num_nodes();
    {
        std::ofstream out(dir / "edges.txt");
        out << "# " << graph.name() << ": " << graph.num_nodes() << " nodes, " << graph.num_edges()
            << " undirected edges\n";
        for (const Edge& e : graph.undirected_edges()) out << e.u << ' ' << e.v << '\n';
    }
    if (has_identity_features(graph)) {
        manifest["features"] = "identity";
    } else {
        manifest["features"] = "features.csv";
        std::ofstream out(dir / "features.csv");
        out << std::setprecision(17);
        const Matrix& f = graph.features();
        for (std::size_t r = 0; r < f.rows(); ++r) {
            for (std::size_t c = 0; c < f.cols(); ++c) {
                if (c) out << ',';
                out << f(r, c);
            }
            out << '\n';
        }
    }
    if (graph.labels()) {
        manifest["labels"] = "labels.txt";
        std::ofstream out(dir / "labels.txt");
        for (int y : *graph.labels()) out << y << '\n';
    } else {
        manifest["labels"] = nullptr;
    }
    const fs::path path = dir / "manifest.json";
    std::ofstream(path) << manifest.dump(2) << '\n';
    return path;
}

DatasetStats dataset_stats(const Graph& graph) {
    DatasetStats s;
    s.nodes = graph.num_nodes();
    s.directed_edges = graph.num_directed_entries();
    s.features = graph.feature_dim();
    s.classes = graph.num_classes();
    s.density_permille = graph.density() * 1000.0;
    return s;
}

}  // namespace bandana
