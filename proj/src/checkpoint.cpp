#include "bandana/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "bandana/config.hpp"

namespace bandana {

using nlohmann::json;

json model_config_json(const ModelConfig& c) {
    return json{{"in_dim", c.in_dim},
                {"hidden_dim", c.hidden_dim},
                {"out_dim", c.out_dim},
                {"num_layers", c.num_layers},
                {"decoder_hidden", c.decoder_hidden},
                {"encoder_dropout", c.encoder_dropout},
                {"decoder_dropout", c.decoder_dropout},
                {"bn_momentum", c.bn_momentum}};
}

ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.in_dim = j.at("in_dim").get<std::size_t>();
    c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.out_dim = j.at("out_dim").get<std::size_t>();
    c.num_layers = j.at("num_layers").get<std::size_t>();
    c.decoder_hidden = j.at("decoder_hidden").get<std::size_t>();
    c.encoder_dropout = j.at("encoder_dropout").get<double>();
    c.decoder_dropout = j.at("decoder_dropout").get<double>();
    c.bn_momentum = j.value("bn_momentum", 0.1);
    return c;
}

void save_checkpoint(const ModelParams& params, const json& config, const std::filesystem::path& path) {
    json tensors = json::object();
    for (const auto& [name, m] : params.entries()) {
        tensors[name] = json{{"shape", {m->rows(), m->cols()}}, {"data", m->values()}};
    }
    const json doc{{"version", kVersion},
                   {"config", config},
                   {"model", model_config_json(params.config)},
                   {"params", std::move(tensors)}};
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot write checkpoint");
    out << doc.dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open checkpoint");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": invalid checkpoint JSON: " + e.what());
    }
    Checkpoint ck;
    ck.config = doc.value("config", json::object());
    const ModelConfig mc = model_config_from_json(doc.at("model"));
    Rng rng(0);
    ck.params = init_params(mc, rng);
    const json& tensors = doc.at("params");
    for (auto& e : ck.params.entries()) {
        if (!tensors.contains(e.path)) {
            if (e.in_decoder) {
                ck.has_decoder = false;
                e.value->fill(0.0);
                continue;
            }
            throw std::runtime_error(path.string() + ": missing tensor '" + e.path + "'");
        }
        const json& t = tensors[e.path];
        const auto rows = t.at("shape").at(0).get<std::size_t>();
        const auto cols = t.at("shape").at(1).get<std::size_t>();
        if (rows != e.value->rows() || cols != e.value->cols()) {
            throw std::runtime_error(path.string() + ": tensor '" + e.path + "' has shape " + std::to_string(rows) +
                                     "x" + std::to_string(cols) + ", expected " +
                                     std::to_string(e.value->rows()) + "x" + std::to_string(e.value->cols()));
        }
        auto data = t.at("data").get<std::vector<double>>();
        if (data.size() != rows * cols) throw std::runtime_error(path.string() + ": tensor '" + e.path + "' size");
        *e.value = Matrix(rows, cols, std::move(data));
    }
    return ck;
}

}  // namespace bandana
