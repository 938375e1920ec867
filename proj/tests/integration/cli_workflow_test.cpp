#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "bandana/config.hpp"
#include "bandana/dataset_io.hpp"
#include "bandana/log.hpp"
#include "cli/commands.hpp"
#include "proxies.hpp"
#include "tempdir.hpp"

using namespace bandana;
using nlohmann::json;
namespace fs = std::filesystem;

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

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_doc(const fs::path& p) { return json::parse(read_text(p)); }

void expect_ok(const CliResult& r) {
    INFO(r.err);
    REQUIRE(r.code == 0);
}

void expect_provenance(const json& j) {
    CHECK(j["version"] == kVersion);
    CHECK(j["config_hash"].get<std::string>().size() == 16);
}

}  // namespace

TEST_SUITE("integration") {

TEST_CASE("generate, pretrain, probe and diagnose from the command line") {
    logging::set_level(logging::Level::error);
    oracle::TempDir dir("workflow");
    const std::string data = (dir / "sbm").string();
    oracle::SbmSpec spec;
    spec.nodes = 240;
    spec.feature_dim = 80;
    spec.seed = 5;
    write_dataset(oracle::sbm_graph(spec), data);

    const std::vector<std::string> small{"--dataset", data, "--layers", "2", "--hidden", "16", "--out-dim", "16"};
    auto with = [&](std::vector<std::string> head, std::vector<std::string> tail = {}) {
        head.insert(head.end(), small.begin(), small.end());
        head.insert(head.end(), tail.begin(), tail.end());
        return head;
    };
    const fs::path runs = dir / "runs";
    expect_ok(run_cli(with({"pretrain"}, {"--epochs", "15", "--repeats", "2", "--out", runs.string()})));
    for (const char* seed : {"seed_0", "seed_1"}) {
        for (const char* f : {"checkpoint.json", "split.json", "history.csv", "run.json"})
            CHECK(fs::exists(runs / seed / f));
        expect_provenance(read_doc(runs / seed / "run.json"));
    }
    CHECK(read_doc(runs / "seed_1" / "run.json")["config"]["seed"] == 1);
    CHECK(read_doc(runs / "seed_1" / "run.json")["config"]["split_seed"] == 1);
    expect_provenance(read_doc(runs / "summary.json"));
    const std::string history = read_text(runs / "seed_0" / "history.csv");
    CHECK(history.starts_with("epoch,loss,val_auc\n"));

    SUBCASE("reruns are bitwise identical") {
        const fs::path again = dir / "again";
        expect_ok(run_cli(with({"pretrain"}, {"--epochs", "15", "--repeats", "2", "--out", again.string()})));
        // only the echoed output directory differs
        for (const char* f : {"split.json", "history.csv"})
            CHECK(read_text(runs / "seed_1" / f) == read_text(again / "seed_1" / f));
        CHECK(read_doc(runs / "seed_1" / "checkpoint.json")["params"] ==
              read_doc(again / "seed_1" / "checkpoint.json")["params"]);
    }

    SUBCASE("link probing ignores the decoder") {
        const fs::path m1 = dir / "link.json";
        expect_ok(run_cli({"probe", "link", "--checkpoint", runs.string(), "--out", m1.string()}));
        const json full = read_doc(m1);
        expect_provenance(full);
        CHECK(full["runs"].size() == 2);
        CHECK(full["auc"]["mean"].get<double>() > 0.6);

        // strip every decoder tensor from both checkpoints
        const fs::path stripped = dir / "stripped";
        for (const char* seed : {"seed_0", "seed_1"}) {
            fs::create_directories(stripped / seed);
            json ck = read_doc(runs / seed / "checkpoint.json");
            for (auto it = ck["params"].begin(); it != ck["params"].end();)
                it = it.key().starts_with("decoder.") ? ck["params"].erase(it) : std::next(it);
            std::ofstream(stripped / seed / "checkpoint.json") << ck.dump();
            fs::copy_file(runs / seed / "split.json", stripped / seed / "split.json");
        }
        const fs::path m2 = dir / "link_stripped.json";
        expect_ok(run_cli({"probe", "link", "--checkpoint", stripped.string(), "--out", m2.string()}));
        const json bare = read_doc(m2);
        CHECK(bare["auc"] == full["auc"]);
        CHECK(bare["ap"] == full["ap"]);
        for (std::size_t i = 0; i < 2; ++i) {
            json a = bare["runs"][i], b = full["runs"][i];
            a.erase("checkpoint");
            b.erase("checkpoint");
            CHECK(a == b);
            CHECK(a.contains("hits@10"));
        }
    }

    SUBCASE("node probing with reduced labels") {
        const fs::path m = dir / "node.json";
        expect_ok(run_cli({"probe", "node", "--checkpoint", runs.string(), "--label-ratio", "0.5", "--repeats", "2",
                           "--out", m.string()}));
        const json j = read_doc(m);
        CHECK(j["runs"].size() == 4);
        CHECK(j["label_ratio"] == 0.5);
        CHECK(j["micro_f1"]["mean"].get<double>() > 0.25);
    }

    SUBCASE("probing a checkpoint against the wrong dataset") {
        const std::string karate = (dir / "karate").string();
        expect_ok(run_cli({"dataset", "gen", "karate", "--out", karate}));
        const CliResult r = run_cli({"probe", "link", "--checkpoint", runs.string(), "--dataset", karate});
        CHECK(r.code == 1);
        CHECK(r.err.find("input features") != std::string::npos);
    }

    SUBCASE("diagnostics") {
        const fs::path out = dir / "diag";
        expect_ok(run_cli({"diagnose", "mask-ratio", "--dataset", data, "--out", out.string()}));
        const json mr = read_doc(out / "mask_ratio.json");
        expect_provenance(mr);
        CHECK(mr["measured"].get<double>() >= mr["calculated"].get<double>());

        expect_ok(run_cli({"diagnose", "energy", "--trials", "500", "--out", out.string()}));
        CHECK(read_doc(out / "energy.json")["violations"] == 0);

        expect_ok(run_cli({"diagnose", "entropy", "--dataset", data, "--tau", "0.4", "--out", out.string()}));
        const json en = read_doc(out / "entropy.json");
        CHECK(en["bandwidth"]["median"].get<double>() < en["gcn"]["median"].get<double>());
        CHECK(fs::exists(out / "entropy_bandwidth.csv"));

        expect_ok(run_cli({"diagnose", "components", "--dataset", data, "--mask", "bernoulli", "--p", "0.7",
                           "--repeats", "3", "--out", out.string()}));
        CHECK(read_doc(out / "components.json")["increased"] == 3);
        expect_ok(run_cli({"diagnose", "components", "--dataset", data, "--repeats", "3", "--out", out.string()}));
        const json bw = read_doc(out / "components.json");
        CHECK(bw["increased"] == 0);
        for (const auto& m : bw["masked"]) CHECK(m["count"] == bw["unmasked"]["count"]);

        expect_ok(run_cli({"diagnose", "embed", "--checkpoint", (runs / "seed_0" / "checkpoint.json").string(),
                           "--out", out.string()}));
        CHECK(read_text(out / "pca.csv").starts_with("node,dim0,dim1\n"));

        expect_ok(run_cli(with({"diagnose", "depth"}, {"--depths", "1,3", "--epochs", "3", "--repeats", "1", "--out",
                                                        out.string()})));
        CHECK(read_doc(out / "depth.json")["rows"].size() == 2);
    }

    SUBCASE("ablation grid") {
        const fs::path out = dir / "ablate";
        expect_ok(run_cli(with({"ablate"}, {"--epochs", "3", "--repeats", "1", "--tasks", "both", "--out",
                                             out.string()})));
        const json j = read_doc(out / "ablation.json");
        expect_provenance(j);
        REQUIRE(j["rows"].size() == 6);
        CHECK(j["rows"][0]["strategy"] == "bernoulli");
        CHECK(j["rows"][5]["layerwise"] == "lwp");
        for (const auto& row : j["rows"]) {
            CHECK(row["node_accuracy"].is_object());
            CHECK(row["link_auc"].is_object());
        }
        const double p = j["mask_ratio"].get<double>();
        CHECK(p > 0.5);
        CHECK(p < 1.0);
        const std::string csv = read_text(out / "ablation.csv");
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
    }
}

}  // TEST_SUITE
