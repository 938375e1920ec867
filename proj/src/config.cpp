#include "bandana/config.hpp"

#include <cstdio>
#include <map>
#include <stdexcept>

#include "bandana/rng.hpp"

namespace bandana {

using nlohmann::json;

void RunConfig::validate() const {
    train.validate();
    auto fail = [](const std::string& msg) { throw std::invalid_argument("run config: " + msg); };
    if (!(train_frac > 0.0 && val_frac > 0.0 && train_frac + val_frac < 1.0)) {
        fail("edge split fractions must be positive and sum below 1");
    }
    if (repeats < 1) fail("repeats must be at least 1");
    if (!(probe_weight_decay >= 0.0)) fail("probe weight decay must be non-negative");
    if (!(node_train_frac > 0.0 && node_val_frac >= 0.0 && node_train_frac + node_val_frac < 1.0)) {
        fail("node split fractions must be positive and sum below 1");
    }
    if (!(label_ratio > 0.0 && label_ratio <= 1.0)) fail("label ratio must be in (0, 1]");
}

namespace {

struct PresetRow {
    std::size_t layers;
    double lr, tau;
    std::size_t hidden, out;
    double enc_drop, dec_drop, enc_wd, probe_wd;
};

const std::map<std::string, PresetRow>& preset_table() {
    static const std::map<std::string, PresetRow> table = {
        {"cora", {3, 1e-2, 0.9, 256, 256, 0.8, 0.0, 5e-5, 5e-3}},
        {"citeseer", {5, 2e-2, 0.2, 256, 256, 0.8, 0.0, 5e-5, 1e-1}},
        {"pubmed", {2, 1e-3, 0.2, 64, 32, 0.6, 0.7, 5e-5, 5e-5}},
        {"photo", {2, 2e-3, 1.0, 256, 64, 0.8, 0.2, 5e-5, 5e-4}},
        {"computers", {3, 1e-3, 0.4, 256, 64, 0.5, 0.2, 0.0, 5e-4}},
        {"cs", {2, 1e-2, 1e-6, 64, 32, 0.8, 0.2, 5e-5, 1e-3}},
        {"physics", {2, 2e-3, 0.4, 256, 128, 0.8, 0.2, 5e-5, 1e-3}},
    };
    return table;
}

}  // namespace

std::optional<RunConfig> preset(const std::string& name) {
    const auto& table = preset_table();
    const auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    const PresetRow& r = it->second;
    RunConfig c;
    c.preset = name;
    c.train.num_layers = r.layers;
    c.train.lr = r.lr;
    c.train.temperature = r.tau;
    c.train.hidden_dim = r.hidden;
    c.train.out_dim = r.out;
    c.train.encoder_dropout = r.enc_drop;
    c.train.decoder_dropout = r.dec_drop;
    c.train.weight_decay = r.enc_wd;
    c.probe_weight_decay = r.probe_wd;
    c.train.max_epochs = 1000;
    c.train.patience = 30;
    return c;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : preset_table()) out.push_back(k);
    return out;
}

json to_json(const TrainConfig& c) {
    return json{
        {"num_layers", c.num_layers},
        {"hidden_dim", c.hidden_dim},
        {"out_dim", c.out_dim},
        {"decoder_hidden", c.decoder_hidden},
        {"lr", c.lr},
        {"temperature", c.temperature},
        {"mask_kind", to_string(c.mask_kind)},
        {"mask_ratio", c.mask_ratio},
        {"encoder_dropout", c.encoder_dropout},
        {"decoder_dropout", c.decoder_dropout},
        {"weight_decay", c.weight_decay},
        {"max_epochs", c.max_epochs},
        {"patience", c.patience},
        {"neg_per_pos", c.neg_per_pos},
        {"seed", c.seed},
        {"layerwise", to_string(c.layerwise)},
        {"bn_momentum", c.bn_momentum},
    };
}

json to_json(const RunConfig& c) {
    json j = to_json(c.train);
    j["preset"] = c.preset;
    j["dataset"] = c.dataset;
    j["split_file"] = c.split_file;
    j["train_frac"] = c.train_frac;
    j["val_frac"] = c.val_frac;
    j["split_seed"] = c.split_seed;
    j["repeats"] = c.repeats;
    j["output_dir"] = c.output_dir;
    j["probe_weight_decay"] = c.probe_weight_decay;
    j["node_train_frac"] = c.node_train_frac;
    j["node_val_frac"] = c.node_val_frac;
    j["label_ratio"] = c.label_ratio;
    return j;
}

namespace {

// Applies the keys it knows; returns false for an unknown key.
bool apply_train_key(const std::string& key, const json& v, TrainConfig& c) {
    if (key == "num_layers") c.num_layers = v.get<std::size_t>();
    else if (key == "hidden_dim") c.hidden_dim = v.get<std::size_t>();
    else if (key == "out_dim") c.out_dim = v.get<std::size_t>();
    else if (key == "decoder_hidden") c.decoder_hidden = v.get<std::size_t>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "temperature") c.temperature = v.get<double>();
    else if (key == "mask_kind") {
        const auto k = parse_mask_kind(v.get<std::string>());
        if (!k) throw std::invalid_argument("config: unknown mask_kind '" + v.get<std::string>() + "'");
        c.mask_kind = *k;
    } else if (key == "mask_ratio") c.mask_ratio = v.get<double>();
    else if (key == "encoder_dropout") c.encoder_dropout = v.get<double>();
    else if (key == "decoder_dropout") c.decoder_dropout = v.get<double>();
    else if (key == "weight_decay") c.weight_decay = v.get<double>();
    else if (key == "max_epochs") c.max_epochs = v.get<std::size_t>();
    else if (key == "patience") c.patience = v.get<std::size_t>();
    else if (key == "neg_per_pos") c.neg_per_pos = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "layerwise") {
        const auto m = parse_layerwise_mode(v.get<std::string>());
        if (!m) throw std::invalid_argument("config: unknown layerwise mode '" + v.get<std::string>() + "'");
        c.layerwise = *m;
    } else if (key == "bn_momentum") c.bn_momentum = v.get<double>();
    else return false;
    return true;
}

}  // namespace

void apply_json(const json& j, TrainConfig& c) {
    for (const auto& [key, v] : j.items())
        if (!apply_train_key(key, v, c)) throw std::invalid_argument("config: unknown key '" + key + "'");
}

void apply_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    // a preset named in the file is applied before the other keys
    if (j.contains("preset") && !j["preset"].get<std::string>().empty()) {
        const auto p = preset(j["preset"].get<std::string>());
        if (!p) throw std::invalid_argument("config: unknown preset '" + j["preset"].get<std::string>() + "'");
        c = *p;
    }
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "preset") continue;
            if (apply_train_key(key, v, c.train)) continue;
            if (key == "dataset") c.dataset = v.get<std::string>();
            else if (key == "split_file") c.split_file = v.get<std::string>();
            else if (key == "train_frac") c.train_frac = v.get<double>();
            else if (key == "val_frac") c.val_frac = v.get<double>();
            else if (key == "split_seed") c.split_seed = v.get<std::uint64_t>();
            else if (key == "repeats") c.repeats = v.get<std::size_t>();
            else if (key == "output_dir") c.output_dir = v.get<std::string>();
            else if (key == "probe_weight_decay") c.probe_weight_decay = v.get<double>();
            else if (key == "node_train_frac") c.node_train_frac = v.get<double>();
            else if (key == "node_val_frac") c.node_val_frac = v.get<double>();
            else if (key == "label_ratio") c.label_ratio = v.get<double>();
            else throw std::invalid_argument("config: unknown key '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
    }
}

std::string config_hash(const RunConfig& c) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(c).dump())));
    return buf;
}

}  // namespace bandana
