#include "run_io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace bandana::cli {

using nlohmann::json;

json provenance(const RunConfig& config) {
    return json{{"version", kVersion}, {"config_hash", config_hash(config)}, {"config", bandana::to_json(config)}};
}

void write_json(const json& j, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
    }
}

json to_json(const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; }

json to_json(const LinkMetrics& m) {
    json j{{"auc", m.auc}, {"ap", m.ap}};
    for (const auto& [k, v] : m.hits) j["hits@" + std::to_string(k)] = v;
    return j;
}

json to_json(const NodeMetrics& m) {
    return json{{"micro_f1", m.micro_f1},
                {"macro_f1", m.macro_f1},
                {"accuracy", m.accuracy},
                {"val_accuracy", m.val_accuracy},
                {"best_epoch", m.best_epoch}};
}

json to_json(const Histogram& h) {
    return json{{"edges", h.edges}, {"counts", h.counts}, {"median", h.median}, {"samples", h.samples}};
}

json to_json(const Components& c) { return json{{"count", c.count}, {"giant", c.giant}}; }

std::string format_mean_std(const MeanStd& m, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << m.mean << " ± " << m.std;
    return s.str();
}

void write_histogram_csv(const Histogram& h, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write");
    out << "lo,hi,count\n" << std::setprecision(10);
    for (std::size_t b = 0; b < h.counts.size(); ++b) out << h.edges[b] << ',' << h.edges[b + 1] << ',' << h.counts[b] << '\n';
}

}  // namespace bandana::cli
