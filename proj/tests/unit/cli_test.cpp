#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "bandana/checkpoint.hpp"
#include "bandana/config.hpp"
#include "bandana/generators.hpp"
#include "bandana/log.hpp"
#include "cli/commands.hpp"
#include "cli/pipeline.hpp"
#include "cli/run_io.hpp"
#include "tempdir.hpp"

using namespace bandana;
using nlohmann::json;

namespace {

struct CliResult {
    int code = 0;
    std::string out, err;
};

CliResult run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "bandana");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    auto* old_out = std::cout.rdbuf(out.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    CliResult r;
    r.code = cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

json slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("presets carry the benchmark hyperparameters") {
    CHECK(preset_names().size() == 7);
    const RunConfig cora = *preset("cora");
    CHECK(cora.train.num_layers == 3);
    CHECK(cora.train.lr == 1e-2);
    CHECK(cora.train.temperature == 0.9);
    CHECK(cora.train.hidden_dim == 256);
    CHECK(cora.train.out_dim == 256);
    CHECK(cora.train.encoder_dropout == 0.8);
    CHECK(cora.train.weight_decay == 5e-5);
    CHECK(cora.train.patience == 30);
    const RunConfig pubmed = *preset("pubmed");
    CHECK(pubmed.train.num_layers == 2);
    CHECK(pubmed.train.out_dim == 32);
    CHECK(pubmed.train.decoder_dropout == 0.7);
    CHECK(preset("cs")->train.temperature == 1e-6);
    CHECK_FALSE(preset("Cora").has_value());
    for (const auto& name : preset_names()) preset(name)->validate();
}

TEST_CASE("configuration JSON") {
    RunConfig c = *preset("citeseer");
    c.dataset = "data/x";
    c.train.seed = 7;
    c.train.mask_kind = MaskKind::truncgauss;
    c.train.mask_ratio = 0.6;
    c.train.layerwise = LayerwiseMode::lwm;
    RunConfig back;
    apply_json(to_json(c), back);
    CHECK(to_json(back) == to_json(c));
    CHECK(config_hash(back) == config_hash(c));

    const std::string h = config_hash(c);
    CHECK(h.size() == 16);
    CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
    RunConfig other = c;
    other.train.seed = 8;
    CHECK(config_hash(other) != h);

    SUBCASE("partial documents only touch the given fields") {
        RunConfig d = c;
        apply_json(json{{"repeats", 4}, {"lr", 0.5}}, d);
        CHECK(d.repeats == 4);
        CHECK(d.train.lr == 0.5);
        CHECK(d.train.num_layers == c.train.num_layers);
    }
    SUBCASE("unknown keys and bad values are rejected") {
        RunConfig d;
        CHECK_THROWS(apply_json(json{{"repeat", 4}}, d));
        CHECK_THROWS(apply_json(json{{"mask_kind", "gaussian"}}, d));
        CHECK_THROWS(apply_json(json{{"lr", "fast"}}, d));
        CHECK_THROWS(apply_json(json{{"preset", "nope"}}, d));
    }
    SUBCASE("validation") {
        RunConfig d = c;
        d.repeats = 0;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
        d = c;
        d.label_ratio = 0;
        CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    }
}

TEST_CASE("checkpoints round-trip exactly") {
    oracle::TempDir dir("ckpt");
    Rng rng(3);
    ModelConfig mc;
    mc.in_dim = 5;
    mc.hidden_dim = 7;
    mc.out_dim = 3;
    mc.num_layers = 3;
    mc.decoder_hidden = 4;
    ModelParams p = init_params(mc, rng);
    p.encoder[1].running.mean(0, 2) = 1.0 / 3.0;
    const json meta{{"note", "x"}};
    save_checkpoint(p, meta, dir / "c.json");
    const Checkpoint ck = load_checkpoint(dir / "c.json");
    CHECK(ck.has_decoder);
    CHECK(ck.config == meta);
    const auto want = p.entries();
    const auto got = std::as_const(ck.params).entries();
    REQUIRE(want.size() == got.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(want[i].path == got[i].first);
        CHECK(*want[i].value == *got[i].second);
    }

    SUBCASE("decoder tensors may be absent") {
        json doc = slurp(dir / "c.json");
        for (auto it = doc["params"].begin(); it != doc["params"].end();)
            it = it.key().starts_with("decoder.") ? doc["params"].erase(it) : std::next(it);
        std::ofstream(dir / "enc.json") << doc.dump();
        const Checkpoint enc = load_checkpoint(dir / "enc.json");
        CHECK_FALSE(enc.has_decoder);
        CHECK(enc.params.encoder[2].weight == p.encoder[2].weight);
    }
    SUBCASE("missing encoder tensors and wrong shapes are errors") {
        json doc = slurp(dir / "c.json");
        doc["params"].erase("encoder.0.weight");
        std::ofstream(dir / "bad.json") << doc.dump();
        CHECK_THROWS_WITH_AS(load_checkpoint(dir / "bad.json"), doctest::Contains("encoder.0.weight"),
                             std::runtime_error);
        doc = slurp(dir / "c.json");
        doc["model"]["hidden_dim"] = 8;
        std::ofstream(dir / "shape.json") << doc.dump();
        CHECK_THROWS_AS(load_checkpoint(dir / "shape.json"), std::runtime_error);
        CHECK_THROWS(load_checkpoint(dir / "absent.json"));
    }
}

TEST_CASE("argument handling") {
    logging::set_level(logging::Level::error);
    CHECK(run_cli({"--version"}).code == 0);
    CHECK(run_cli({"--version"}).out.find(kVersion) != std::string::npos);
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({}).code != 0);
    CHECK(run_cli({"frobnicate"}).code != 0);
    CHECK(run_cli({"pretrain", "--preset", "nope"}).code != 0);
    CHECK(run_cli({"dataset", "gen", "hexagon"}).code != 0);

    oracle::TempDir dir("cli-args");
    const std::string data = (dir / "karate").string();
    REQUIRE(run_cli({"dataset", "gen", "karate", "--out", data}).code == 0);

    SUBCASE("flag combinations that make no sense are refused") {
        const CliResult tau = run_cli({"pretrain", "--dataset", data, "--mask", "bernoulli", "--tau", "0.5"});
        CHECK(tau.code == 1);
        CHECK(tau.err.find("--tau") != std::string::npos);
        CHECK(run_cli({"pretrain", "--dataset", data, "--p", "0.5"}).code == 1);
        CHECK(run_cli({"pretrain", "--dataset", data, "--mask", "bernoulli", "--layerwise", "lwp"}).code == 1);
        CHECK(run_cli({"pretrain", "--dataset", data, "--mask", "uniform", "--p", "0.3"}).code == 1);
        CHECK(run_cli({"pretrain", "--dataset", data, "--layers", "0"}).code == 1);
    }
    SUBCASE("missing datasets name the lookup path") {
        const CliResult r = run_cli({"dataset", "stats", (dir / "nothing").string()});
        CHECK(r.code == 1);
        CHECK(r.err.find("not found") != std::string::npos);
    }
    SUBCASE("stats") {
        const CliResult r = run_cli({"dataset", "stats", data, "--json"});
        REQUIRE(r.code == 0);
        const json j = json::parse(r.out);
        CHECK(j["nodes"] == 34);
        CHECK(j["edges"] == 156);
        CHECK(j["classes"] == 4);
    }
    SUBCASE("frozen split files") {
        const std::string split = (dir / "split.json").string();
        REQUIRE(run_cli({"dataset", "split", data, "--seed", "4", "--out", split}).code == 0);
        const EdgeSplit s = read_split(split);
        CHECK(s.train_pos.size() == 66);
        RunConfig c;
        c.split_file = split;
        const Graph g = gen_karate_club();
        CHECK(cli::repeat_split(g, c, 3) == s);
        c.split_file.clear();
        c.split_seed = 4;
        CHECK(cli::repeat_split(g, c, 0) == s);
    }
    SUBCASE("config file with flag override") {
        const auto cfg = dir / "run.json";
        std::ofstream(cfg) << json{{"dataset", data}, {"max_epochs", 2}, {"hidden_dim", 8}, {"out_dim", 8}}.dump();
        const std::string out = (dir / "runs").string();
        REQUIRE(run_cli({"pretrain", "--config", cfg.string(), "--epochs", "3", "--out", out}).code == 0);
        const json run = slurp(dir / "runs" / "seed_0" / "run.json");
        CHECK(run["epochs_run"] == 3);
        CHECK(run["config"]["hidden_dim"] == 8);
        CHECK(run["version"] == kVersion);
        CHECK(run["config_hash"].get<std::string>().size() == 16);
    }
    logging::set_level(logging::Level::info);
}

TEST_CASE("run_io helpers") {
    CHECK(cli::format_mean_std({0.95712, 0.00121}) == "0.9571 ± 0.0012");
    const json j = cli::to_json(MeanStd{0.5, 0.25});
    CHECK(j["mean"] == 0.5);
    CHECK(j["std"] == 0.25);
    const json p = cli::provenance(RunConfig{});
    CHECK(p.contains("version"));
    CHECK(p.contains("config_hash"));
    CHECK(p.contains("config"));
}

}  // TEST_SUITE
