#include <doctest.h>

#include <cstdlib>

#include "bandana/config.hpp"
#include "bandana/log.hpp"
#include "cli/pipeline.hpp"
#include "proxies.hpp"

using namespace bandana;

namespace {

Graph proxy_graph() {
    oracle::SbmSpec s;
    s.nodes = 400;
    s.feature_dim = 120;
    s.mean_degree = 5.0;
    s.seed = 2;
    return oracle::sbm_graph(s);
}

RunConfig proxy_config() {
    RunConfig c;
    c.train.num_layers = 2;
    c.train.hidden_dim = 32;
    c.train.out_dim = 32;
    c.train.decoder_hidden = 16;
    c.train.temperature = 0.8;
    c.train.encoder_dropout = 0.3;
    c.train.max_epochs = 80;
    c.train.patience = 20;
    c.repeats = 3;
    c.probe_weight_decay = 1e-3;
    return c;
}

}  // namespace

TEST_SUITE("integration") {

TEST_CASE("pretraining then probing on a planted-partition graph") {
    logging::set_level(logging::Level::warn);
    const Graph g = proxy_graph();
    const RunConfig c = proxy_config();
    const auto runs = cli::run_repeats(g, c, {true, true}, false);
    REQUIRE(runs.size() == 3);
    for (const auto& r : runs) {
        INFO("seed " << r.seed);
        REQUIRE(r.link.has_value());
        REQUIRE(r.node.has_value());
        // class-level homophily alone caps AUC near 0.5 + (0.8 - 0.25) / 2
        CHECK(r.link->auc > 0.72);
        CHECK(r.link->ap > 0.65);
        // four balanced classes: chance is 0.25
        CHECK(r.node->accuracy > 0.5);
        CHECK(r.history.best_val_auc > 0.65);
    }
    CHECK(runs[0].seed == 0);
    CHECK(runs[2].seed == 2);
    CHECK_FALSE(runs[0].history == runs[1].history);
}

TEST_CASE("parallel repeats reproduce sequential ones bitwise") {
    const Graph g = proxy_graph();
    RunConfig c = proxy_config();
    c.train.max_epochs = 10;
    c.repeats = 4;
    setenv("BANDANA_THREADS", "3", 1);
    const auto seq = cli::run_repeats(g, c, {true, true}, false);
    const auto par = cli::run_repeats(g, c, {true, true}, true);
    unsetenv("BANDANA_THREADS");
    REQUIRE(seq.size() == par.size());
    for (std::size_t r = 0; r < seq.size(); ++r) {
        CHECK(seq[r].history == par[r].history);
        CHECK(seq[r].link->auc == par[r].link->auc);
        CHECK(seq[r].link->ap == par[r].link->ap);
        CHECK(seq[r].node->micro_f1 == par[r].node->micro_f1);
    }
}

TEST_CASE("both masking families learn the proxy link task") {
    const Graph g = proxy_graph();
    RunConfig c = proxy_config();
    c.repeats = 2;
    RunConfig b = c;
    b.train.mask_kind = MaskKind::bernoulli;
    b.train.layerwise = LayerwiseMode::last;
    b.train.mask_ratio = 0.7;
    double bw = 0, bern = 0;
    for (const auto& r : cli::run_repeats(g, c, {true, false}, false)) bw += r.link->auc;
    for (const auto& r : cli::run_repeats(g, b, {true, false}, false)) bern += r.link->auc;
    MESSAGE("bandwidth " << bw / 2 << " bernoulli " << bern / 2);
    CHECK(bern / 2 > 0.7);
    CHECK(bw / 2 > 0.7);
}

TEST_CASE("a single layer makes LWM and last identical") {
    const Graph g = proxy_graph();
    RunConfig c = proxy_config();
    c.train.num_layers = 1;
    c.train.max_epochs = 8;
    c.repeats = 1;
    c.train.layerwise = LayerwiseMode::lwm;
    const auto lwm = cli::run_repeat(g, c, 0, {true, false});
    c.train.layerwise = LayerwiseMode::last;
    const auto last = cli::run_repeat(g, c, 0, {true, false});
    CHECK(lwm.history == last.history);
    CHECK(lwm.link->auc == last.link->auc);
}

}  // TEST_SUITE
