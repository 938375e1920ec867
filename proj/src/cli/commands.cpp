#include "commands.hpp"

#include <algorithm>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "bandana/checkpoint.hpp"
#include "bandana/dataset_io.hpp"
#include "bandana/diagnostics.hpp"
#include "bandana/generators.hpp"
#include "bandana/log.hpp"
#include "bandana/masking.hpp"
#include "bandana/split.hpp"
#include "pipeline.hpp"
#include "run_io.hpp"

namespace bandana::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// run configuration from preset, config file and flags (in that order)

struct RunOptions {
    std::string config_file;
    std::string preset_name;
    std::vector<std::function<void(RunConfig&)>> overrides;
    bool parallel = false;
    bool tau_given = false, p_given = false, layerwise_given = false;
};

template <typename T, typename Set>
CLI::Option* override_option(CLI::App* app, RunOptions& o, const std::string& name, const std::string& help,
                             Set set) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(name, *value, help);
    o.overrides.push_back([value, opt, set](RunConfig& c) {
        if (opt->count() > 0) set(c, *value);
    });
    return opt;
}

void add_run_options(CLI::App* app, RunOptions& o, bool with_model = true) {
    app->add_option("--config", o.config_file, "JSON run configuration");
    app->add_option("--preset", o.preset_name, "hyperparameter preset")
        ->check(CLI::IsMember(preset_names()));
    override_option<std::string>(app, o, "--dataset", "manifest, dataset directory or dataset name",
                                 [](RunConfig& c, const std::string& v) { c.dataset = v; });
    override_option<std::uint64_t>(app, o, "--seed", "base training seed",
                                   [](RunConfig& c, std::uint64_t v) { c.train.seed = v; });
    override_option<std::size_t>(app, o, "--repeats", "number of seeds",
                                 [](RunConfig& c, std::size_t v) { c.repeats = v; });
    override_option<std::uint64_t>(app, o, "--split-seed", "base edge-split seed",
                                   [](RunConfig& c, std::uint64_t v) { c.split_seed = v; });
    override_option<double>(app, o, "--train-frac", "training edge fraction",
                            [](RunConfig& c, double v) { c.train_frac = v; });
    override_option<double>(app, o, "--val-frac", "validation edge fraction",
                            [](RunConfig& c, double v) { c.val_frac = v; });
    override_option<std::string>(app, o, "--split", "frozen edge split JSON shared by all repeats",
                                 [](RunConfig& c, const std::string& v) { c.split_file = v; });
    override_option<std::string>(app, o, "--out", "output directory",
                                 [](RunConfig& c, const std::string& v) { c.output_dir = v; });
    override_option<double>(app, o, "--label-ratio", "fraction of training labels kept for node probing",
                            [](RunConfig& c, double v) { c.label_ratio = v; });
    override_option<double>(app, o, "--probe-wd", "linear probe weight decay",
                            [](RunConfig& c, double v) { c.probe_weight_decay = v; });
    if (!with_model) return;
    override_option<std::size_t>(app, o, "--layers", "encoder depth",
                                 [](RunConfig& c, std::size_t v) { c.train.num_layers = v; });
    override_option<std::size_t>(app, o, "--hidden", "hidden width",
                                 [](RunConfig& c, std::size_t v) { c.train.hidden_dim = v; });
    override_option<std::size_t>(app, o, "--out-dim", "embedding width",
                                 [](RunConfig& c, std::size_t v) { c.train.out_dim = v; });
    override_option<double>(app, o, "--lr", "learning rate", [](RunConfig& c, double v) { c.train.lr = v; });
    override_option<std::string>(app, o, "--mask", "bandwidth | bernoulli | uniform | truncgauss",
                                 [](RunConfig& c, const std::string& v) {
                                     const auto k = parse_mask_kind(v);
                                     if (!k) throw CLI::ValidationError("--mask", "unknown mask kind " + v);
                                     c.train.mask_kind = *k;
                                 });
    override_option<double>(app, o, "--tau", "bandwidth temperature", [&o](RunConfig& c, double v) {
        c.train.temperature = v;
        o.tau_given = true;
    });
    override_option<double>(app, o, "--p", "mask ratio for bernoulli / uniform / truncgauss",
                            [&o](RunConfig& c, double v) {
                                c.train.mask_ratio = v;
                                o.p_given = true;
                            });
    override_option<std::string>(app, o, "--layerwise", "lwp | lwm | last", [&o](RunConfig& c, const std::string& v) {
        const auto m = parse_layerwise_mode(v);
        if (!m) throw CLI::ValidationError("--layerwise", "unknown mode " + v);
        c.train.layerwise = *m;
        o.layerwise_given = true;
    });
    override_option<double>(app, o, "--enc-dropout", "encoder dropout",
                            [](RunConfig& c, double v) { c.train.encoder_dropout = v; });
    override_option<double>(app, o, "--dec-dropout", "decoder dropout",
                            [](RunConfig& c, double v) { c.train.decoder_dropout = v; });
    override_option<double>(app, o, "--wd", "encoder weight decay",
                            [](RunConfig& c, double v) { c.train.weight_decay = v; });
    override_option<std::size_t>(app, o, "--epochs", "maximum epochs",
                                 [](RunConfig& c, std::size_t v) { c.train.max_epochs = v; });
    override_option<std::size_t>(app, o, "--patience", "early-stopping patience",
                                 [](RunConfig& c, std::size_t v) { c.train.patience = v; });
    override_option<double>(app, o, "--neg-per-pos", "negatives per positive edge",
                            [](RunConfig& c, double v) { c.train.neg_per_pos = v; });
    app->add_flag("--parallel", o.parallel, "run repeats on $BANDANA_THREADS threads");
}

RunConfig build_config(const RunOptions& o) {
    RunConfig c;
    if (!o.preset_name.empty()) c = *preset(o.preset_name);
    if (!o.config_file.empty()) apply_json(read_json(o.config_file), c);
    for (const auto& f : o.overrides) f(c);
    if (o.tau_given && c.train.mask_kind != MaskKind::bandwidth) {
        throw std::invalid_argument("--tau applies to bandwidth masks only");
    }
    if (o.p_given && c.train.mask_kind == MaskKind::bandwidth) {
        throw std::invalid_argument("--p does not apply to bandwidth masks (use --tau)");
    }
    if (c.train.mask_kind == MaskKind::bernoulli && c.train.layerwise != LayerwiseMode::last) {
        if (o.layerwise_given) throw std::invalid_argument("bernoulli masks support --layerwise last only");
        c.train.layerwise = LayerwiseMode::last;
    }
    c.validate();
    return c;
}

Graph load_graph(const RunConfig& c) {
    const LoadedDataset d = load_dataset(resolve_dataset(c.dataset));
    return d.graph;
}

std::string seed_dir(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

// ---------------------------------------------------------------------------
// dataset

struct GenOptions {
    std::string kind;
    std::size_t n = 0;
    std::size_t k = 0;
    double noise = -1.0;
    double p = 0.05;
    std::uint64_t seed = 0;
    std::string out;
};

void setup_dataset(CLI::App& app) {
    auto* ds = app.add_subcommand("dataset", "generate, inspect and split datasets");
    ds->require_subcommand(1);

    auto gen = std::make_shared<GenOptions>();
    auto* g = ds->add_subcommand("gen", "generate a synthetic dataset");
    g->add_option("kind", gen->kind, "swiss-roll | two-moon | karate | erdos-renyi")
        ->required()
        ->check(CLI::IsMember({"swiss-roll", "two-moon", "karate", "erdos-renyi"}));
    g->add_option("--n", gen->n, "number of nodes");
    g->add_option("--k", gen->k, "nearest neighbours per point");
    g->add_option("--noise", gen->noise, "point noise (two-moon default 0.1, swiss-roll 0)");
    g->add_option("--p", gen->p, "edge probability (erdos-renyi)");
    g->add_option("--seed", gen->seed, "generator seed");
    g->add_option("--out", gen->out, "output directory (default data/<kind>)");
    g->callback([gen] {
        Graph graph;
        if (gen->kind == "swiss-roll") {
            graph = gen_swiss_roll(gen->n ? gen->n : 500, gen->k ? gen->k : 12, gen->seed,
                                   gen->noise < 0 ? 0.0 : gen->noise);
        } else if (gen->kind == "two-moon") {
            graph = gen_two_moon(gen->n ? gen->n : 2000, gen->k ? gen->k : 5, gen->noise < 0 ? 0.1 : gen->noise,
                                 gen->seed);
        } else if (gen->kind == "karate") {
            graph = gen_karate_club();
        } else {
            graph = gen_erdos_renyi(gen->n ? gen->n : 100, gen->p, gen->seed);
        }
        const fs::path dir = gen->out.empty() ? fs::path("data") / gen->kind : fs::path(gen->out);
        const fs::path manifest = write_dataset(graph, dir);
        const DatasetStats s = dataset_stats(graph);
        std::cout << "wrote " << manifest.string() << ": " << s.nodes << " nodes, " << s.directed_edges
                  << " directed edges\n";
    });

    auto stats_path = std::make_shared<std::string>();
    auto stats_json = std::make_shared<bool>(false);
    auto* st = ds->add_subcommand("stats", "print node, edge, feature, class and density statistics");
    st->add_option("dataset", *stats_path, "manifest, directory or dataset name")->required();
    st->add_flag("--json", *stats_json, "print JSON");
    st->callback([stats_path, stats_json] {
        const LoadedDataset d = load_dataset(resolve_dataset(*stats_path));
        const DatasetStats s = dataset_stats(d.graph);
        if (*stats_json) {
            std::cout << json{{"name", d.graph.name()},
                              {"nodes", s.nodes},
                              {"edges", s.directed_edges},
                              {"features", s.features},
                              {"classes", s.classes},
                              {"density_permille", s.density_permille},
                              {"self_loops_dropped", d.report.self_loops_dropped},
                              {"duplicates_merged", d.report.duplicates_merged}}
                             .dump(2)
                      << '\n';
            return;
        }
        std::cout << std::left << std::setw(12) << "dataset" << std::setw(8) << "nodes" << std::setw(10) << "edges"
                  << std::setw(10) << "features" << std::setw(9) << "classes" << "density(permille)\n"
                  << std::setw(12) << d.graph.name() << std::setw(8) << s.nodes << std::setw(10) << s.directed_edges
                  << std::setw(10) << s.features << std::setw(9) << s.classes << std::fixed << std::setprecision(2)
                  << s.density_permille << '\n';
    });

    struct SplitOpts {
        std::string dataset, out = "split.json";
        double train = 0.85, val = 0.05;
        std::uint64_t seed = 0;
    };
    auto so = std::make_shared<SplitOpts>();
    auto* sp = ds->add_subcommand("split", "write a frozen edge split");
    sp->add_option("dataset", so->dataset, "manifest, directory or dataset name")->required();
    sp->add_option("--train-frac", so->train, "training fraction");
    sp->add_option("--val-frac", so->val, "validation fraction");
    sp->add_option("--seed", so->seed, "split seed");
    sp->add_option("--out", so->out, "output JSON path");
    sp->callback([so] {
        const LoadedDataset d = load_dataset(resolve_dataset(so->dataset));
        const EdgeSplit s = split_edges(d.graph, so->train, so->val, so->seed);
        write_split(s, so->out);
        std::cout << "train " << s.train_pos.size() << ", val " << s.val_pos.size() << ", test "
                  << s.test_pos.size() << " -> " << so->out << '\n';
    });
}

// ---------------------------------------------------------------------------
// pretrain

void setup_pretrain(CLI::App& app) {
    auto opts = std::make_shared<RunOptions>();
    auto* cmd = app.add_subcommand("pretrain", "masked pretraining; writes checkpoints and histories");
    add_run_options(cmd, *opts);
    cmd->callback([opts] {
        const RunConfig cfg = build_config(*opts);
        const Graph graph = load_graph(cfg);
        const fs::path out(cfg.output_dir);
        std::vector<double> best_vals;
        auto one = [&](std::size_t r) {
            ModelParams params;
            EdgeSplit split;
            const RepeatOutcome o = run_repeat(graph, cfg, r, {false, false}, &params, &split);
            const fs::path dir = out / seed_dir(o.seed);
            RunConfig echo = cfg;
            echo.train.seed = o.seed;
            echo.split_seed = cfg.split_seed + r;
            echo.split_file.clear();  // split.json sits next to the checkpoint
            echo.repeats = 1;
            json meta = provenance(echo);
            save_checkpoint(params, meta, dir / "checkpoint.json");
            write_split(split, dir / "split.json");
            write_history_csv(o.history, dir / "history.csv");
            meta["best_epoch"] = o.history.best_epoch;
            meta["best_val_auc"] = o.history.best_val_auc;
            meta["epochs_run"] = o.history.epochs.size();
            meta["stop_reason"] = o.history.stop_reason;
            write_json(meta, dir / "run.json");
            return o;
        };
        for (std::size_t r = 0; r < cfg.repeats; ++r) {
            const RepeatOutcome o = one(r);
            best_vals.push_back(o.history.best_val_auc);
            std::cout << "seed " << o.seed << ": " << o.history.epochs.size() << " epochs (" << o.history.stop_reason
                      << "), best val AUC " << std::fixed << std::setprecision(4) << o.history.best_val_auc
                      << " at epoch " << o.history.best_epoch << '\n';
        }
        json summary = provenance(cfg);
        summary["best_val_auc"] = to_json(mean_std(best_vals));
        write_json(summary, out / "summary.json");
    });
}

// ---------------------------------------------------------------------------
// probe

std::vector<fs::path> expand_checkpoints(const std::vector<std::string>& specs, std::size_t limit) {
    std::vector<fs::path> out;
    for (const auto& s : specs) {
        const fs::path p(s);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            if (fs::exists(p / "checkpoint.json")) found.push_back(p / "checkpoint.json");
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_directory() && fs::exists(e.path() / "checkpoint.json")) found.push_back(e.path() / "checkpoint.json");
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(p);
        }
    }
    if (out.empty()) throw std::invalid_argument("no checkpoints found");
    if (limit > 0 && out.size() > limit) out.resize(limit);
    return out;
}

RunConfig config_of(const Checkpoint& ck) {
    RunConfig c;
    if (ck.config.contains("config")) apply_json(ck.config["config"], c);
    return c;
}

void check_dims(const Checkpoint& ck, const Graph& g) {
    if (ck.params.config.in_dim != g.feature_dim()) {
        throw std::invalid_argument("checkpoint expects " + std::to_string(ck.params.config.in_dim) +
                                    " input features, dataset has " + std::to_string(g.feature_dim()));
    }
}

struct ProbeOptions {
    std::vector<std::string> checkpoints;
    std::string dataset;
    std::size_t repeats = 0;
    std::string out;
    double label_ratio = 1.0;
    double probe_wd = -1.0;
};

void setup_probe(CLI::App& app) {
    auto* probe = app.add_subcommand("probe", "evaluate frozen encoders");
    probe->require_subcommand(1);

    auto lo = std::make_shared<ProbeOptions>();
    auto* link = probe->add_subcommand("link", "dot-product probing on held-out edges");
    link->add_option("--checkpoint", lo->checkpoints, "checkpoint files or run directories")->required();
    link->add_option("--dataset", lo->dataset, "override the dataset recorded in the checkpoint");
    link->add_option("--repeats", lo->repeats, "use at most this many checkpoints");
    link->add_option("--out", lo->out, "metrics JSON path");
    link->callback([lo] {
        std::vector<double> aucs, aps;
        json per = json::array();
        RunConfig first;
        for (const fs::path& path : expand_checkpoints(lo->checkpoints, lo->repeats)) {
            const Checkpoint ck = load_checkpoint(path);
            RunConfig cfg = config_of(ck);
            if (!lo->dataset.empty()) cfg.dataset = lo->dataset;
            if (per.empty()) first = cfg;
            const Graph g = load_graph(cfg);
            check_dims(ck, g);
            const fs::path split_file = path.parent_path() / "split.json";
            const EdgeSplit split = fs::exists(split_file)
                                        ? read_split(split_file)
                                        : repeat_split(g, cfg, 0);
            const LinkMetrics m = probe_link(ck.params, g, split);
            aucs.push_back(m.auc);
            aps.push_back(m.ap);
            json row = to_json(m);
            row["checkpoint"] = path.string();
            row["seed"] = cfg.train.seed;
            per.push_back(row);
            std::cout << path.string() << ": AUC " << std::fixed << std::setprecision(4) << m.auc << ", AP " << m.ap
                      << '\n';
        }
        json result = provenance(first);
        result["task"] = "link";
        result["dataset"] = first.dataset;
        result["auc"] = to_json(mean_std(aucs));
        result["ap"] = to_json(mean_std(aps));
        result["runs"] = per;
        std::cout << "AUC " << format_mean_std(mean_std(aucs)) << "  AP " << format_mean_std(mean_std(aps)) << '\n';
        if (!lo->out.empty()) write_json(result, lo->out);
    });

    auto no = std::make_shared<ProbeOptions>();
    auto* node = probe->add_subcommand("node", "linear probing for node classification");
    node->add_option("--checkpoint", no->checkpoints, "checkpoint files or run directories")->required();
    node->add_option("--dataset", no->dataset, "override the dataset recorded in the checkpoint");
    node->add_option("--repeats", no->repeats, "probe seeds per checkpoint (default 1)");
    node->add_option("--label-ratio", no->label_ratio, "fraction of training labels kept");
    node->add_option("--probe-wd", no->probe_wd, "override the probe weight decay");
    node->add_option("--out", no->out, "metrics JSON path");
    node->callback([no] {
        std::vector<double> micro, macro;
        json per = json::array();
        RunConfig first;
        for (const fs::path& path : expand_checkpoints(no->checkpoints, 0)) {
            const Checkpoint ck = load_checkpoint(path);
            RunConfig cfg = config_of(ck);
            if (!no->dataset.empty()) cfg.dataset = no->dataset;
            cfg.label_ratio = no->label_ratio;
            if (no->probe_wd >= 0.0) cfg.probe_weight_decay = no->probe_wd;
            if (per.empty()) first = cfg;
            const Graph g = load_graph(cfg);
            check_dims(ck, g);
            const std::size_t reps = std::max<std::size_t>(1, no->repeats);
            for (std::size_t r = 0; r < reps; ++r) {
                const NodeMetrics m = probe_node(ck.params, g, cfg, cfg.train.seed + r);
                micro.push_back(m.micro_f1);
                macro.push_back(m.macro_f1);
                json row = to_json(m);
                row["checkpoint"] = path.string();
                row["probe_seed"] = cfg.train.seed + r;
                per.push_back(row);
            }
        }
        json result = provenance(first);
        result["task"] = "node";
        result["dataset"] = first.dataset;
        result["label_ratio"] = no->label_ratio;
        result["micro_f1"] = to_json(mean_std(micro));
        result["macro_f1"] = to_json(mean_std(macro));
        result["runs"] = per;
        std::cout << "micro-F1 " << format_mean_std(mean_std(micro)) << "  macro-F1 "
                  << format_mean_std(mean_std(macro)) << '\n';
        if (!no->out.empty()) write_json(result, no->out);
    });
}

// ---------------------------------------------------------------------------
// ablate

struct Strategy {
    std::string name;
    MaskKind kind;
    LayerwiseMode mode;
};

const std::vector<Strategy>& ablation_grid() {
    static const std::vector<Strategy> grid = {
        {"bernoulli", MaskKind::bernoulli, LayerwiseMode::last},
        {"uniform", MaskKind::uniform, LayerwiseMode::last},
        {"truncgauss", MaskKind::truncgauss, LayerwiseMode::last},
        {"boltzmann-gibbs", MaskKind::bandwidth, LayerwiseMode::last},
        {"boltzmann-gibbs+lwm", MaskKind::bandwidth, LayerwiseMode::lwm},
        {"boltzmann-gibbs+lwp", MaskKind::bandwidth, LayerwiseMode::lwp},
    };
    return grid;
}

void setup_ablate(CLI::App& app) {
    auto opts = std::make_shared<RunOptions>();
    auto tasks = std::make_shared<std::string>("node");
    auto* cmd = app.add_subcommand("ablate", "compare masking strategies at an equal mask ratio");
    add_run_options(cmd, *opts);
    cmd->add_option("--tasks", *tasks, "node | link | both")->check(CLI::IsMember({"node", "link", "both"}));
    cmd->callback([opts, tasks] {
        const RunConfig base = build_config(*opts);
        const Graph graph = load_graph(base);
        const PipelineTasks t{*tasks != "node", *tasks != "link"};
        // mask ratio matched to the bandwidth masks on the first split
        const EdgeSplit s0 = repeat_split(graph, base, 0);
        const double p = measured_ratio(train_graph(graph, s0), base.train.temperature, 100, base.split_seed);
        std::cout << "matched mask ratio p = " << std::fixed << std::setprecision(4) << p << '\n';

        json rows = json::array();
        const fs::path out(base.output_dir);
        fs::create_directories(out);
        std::ofstream csv(out / "ablation.csv");
        csv << "strategy,layerwise,node_acc_mean,node_acc_std,link_auc_mean,link_auc_std\n";
        for (const Strategy& s : ablation_grid()) {
            RunConfig cfg = base;
            cfg.train.mask_kind = s.kind;
            cfg.train.layerwise = s.mode;
            cfg.train.mask_ratio = p;
            const auto outcomes = run_repeats(graph, cfg, t, opts->parallel);
            std::vector<double> acc, aucs;
            for (const auto& o : outcomes) {
                if (o.node) acc.push_back(o.node->accuracy);
                if (o.link) aucs.push_back(o.link->auc);
            }
            const MeanStd a = mean_std(acc), l = mean_std(aucs);
            rows.push_back(json{{"strategy", s.name},
                                {"mask_kind", to_string(s.kind)},
                                {"layerwise", to_string(s.mode)},
                                {"node_accuracy", acc.empty() ? json(nullptr) : to_json(a)},
                                {"link_auc", aucs.empty() ? json(nullptr) : to_json(l)}});
            csv << s.name << ',' << to_string(s.mode) << ',' << a.mean << ',' << a.std << ',' << l.mean << ','
                << l.std << '\n';
            std::cout << std::left << std::setw(22) << s.name;
            if (!acc.empty()) std::cout << " acc " << format_mean_std(a);
            if (!aucs.empty()) std::cout << " auc " << format_mean_std(l);
            std::cout << '\n';
        }
        json result = provenance(base);
        result["mask_ratio"] = p;
        result["rows"] = rows;
        write_json(result, out / "ablation.json");
    });
}

// ---------------------------------------------------------------------------
// diagnose

struct ReferenceRatios {
    double calculated, measured;
};

const std::map<std::string, ReferenceRatios>& reference_ratios() {
    static const std::map<std::string, ReferenceRatios> table = {
        {"cora", {0.6983, 0.7077}}, {"citeseer", {0.5702, 0.6048}}, {"pubmed", {0.7383, 0.7571}}};
    return table;
}

void setup_diagnose(CLI::App& app) {
    auto* dg = app.add_subcommand("diagnose", "empirical checks of masking and smoothing behaviour");
    dg->require_subcommand(1);

    // mask-ratio
    {
        auto opts = std::make_shared<RunOptions>();
        auto resamples = std::make_shared<std::size_t>(100);
        auto* cmd = dg->add_subcommand("mask-ratio", "calculated vs measured bandwidth mask ratio");
        add_run_options(cmd, *opts);
        cmd->add_option("--resamples", *resamples, "mask draws to average");
        cmd->callback([opts, resamples] {
            const RunConfig cfg = build_config(*opts);
            const Graph g = load_graph(cfg);
            const EdgeSplit s = repeat_split(g, cfg, 0);
            const Graph tg = train_graph(g, s);
            const double calc = calculated_mask_ratio(g.num_nodes(), s.train_pos.size());
            const double meas = measured_ratio(tg, cfg.train.temperature, *resamples, cfg.split_seed);
            const Components comp = count_components(tg);
            std::size_t isolated = 0;
            for (std::size_t i = 0; i < tg.num_nodes(); ++i) isolated += tg.degree(i) == 0;
            std::cout << std::fixed << std::setprecision(4) << "calculated " << calc << "  measured " << meas
                      << "  (train edges " << s.train_pos.size() << ", isolated nodes " << isolated << ")\n";
            json r = provenance(cfg);
            r["calculated"] = calc;
            r["measured"] = meas;
            r["resamples"] = *resamples;
            r["train_edges"] = s.train_pos.size();
            r["isolated_train_nodes"] = isolated;
            r["components"] = to_json(comp);
            const std::string key = cfg.preset.empty() ? g.name() : cfg.preset;
            if (const auto it = reference_ratios().find(key); it != reference_ratios().end()) {
                r["reference"] = {{"calculated", it->second.calculated}, {"measured", it->second.measured}};
                std::cout << "reference calculated " << it->second.calculated << "  measured " << it->second.measured
                          << '\n';
            }
            write_json(r, fs::path(cfg.output_dir) / "mask_ratio.json");
        });
    }
    // energy
    {
        struct EnergyOpts {
            std::size_t trials = 10000;
            std::uint64_t seed = 0;
            std::vector<double> keep = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
            std::string dataset, out = "runs";
        };
        auto o = std::make_shared<EnergyOpts>();
        auto* cmd = dg->add_subcommand("energy", "ego Dirichlet energy under random edge dropping");
        cmd->add_option("--trials", o->trials, "random ego graphs");
        cmd->add_option("--seed", o->seed, "seed");
        cmd->add_option("--keep", o->keep, "edge keep probabilities to cycle through")->delimiter(',');
        cmd->add_option("--dataset", o->dataset, "also report the energies of a dataset's features");
        cmd->add_option("--out", o->out, "output directory");
        cmd->callback([o] {
            Rng rng = Rng::derive(o->seed, "energy-theorem");
            const EnergyTheoremReport rep = verify_energy_theorem(o->trials, o->keep, rng);
            std::cout << "trials " << rep.trials << "  violations " << rep.violations << "  keep=1 trials "
                      << rep.equality_checks << "  max equality gap " << std::scientific << rep.max_equality_gap
                      << std::defaultfloat << '\n';
            json r{{"version", kVersion},
                   {"trials", rep.trials},
                   {"violations", rep.violations},
                   {"equality_checks", rep.equality_checks},
                   {"max_equality_gap", rep.max_equality_gap},
                   {"keep_probs", o->keep},
                   {"seed", o->seed}};
            if (!o->dataset.empty()) {
                const Graph g = load_dataset(resolve_dataset(o->dataset)).graph;
                const double global = global_dirichlet_energy(g, g.features());
                r["dataset"] = o->dataset;
                r["global_energy"] = global;
                r["mean_ego_energy"] = global / static_cast<double>(g.num_nodes());
                std::cout << "dataset global energy " << global << '\n';
            }
            write_json(r, fs::path(o->out) / "energy.json");
        });
    }
    // entropy
    {
        auto opts = std::make_shared<RunOptions>();
        auto bins = std::make_shared<std::size_t>(30);
        auto* cmd = dg->add_subcommand("entropy", "ego-entropy histograms of propagation weights");
        add_run_options(cmd, *opts);
        cmd->add_option("--bins", *bins, "histogram bins");
        cmd->callback([opts, bins] {
            const RunConfig cfg = build_config(*opts);
            const Graph g = load_graph(cfg);
            Rng rng = Rng::derive(cfg.train.seed, "entropy");
            const MaskSet ms = sample_bandwidth_masks(g, cfg.train.temperature, 1, rng);
            const auto bw = ego_entropies(ms.layers[0]);
            const auto gcn = ego_entropies(normalize_propagation(g.adjacency(true)));
            const Histogram hb = histogram(bw, *bins), hg = histogram(gcn, *bins);
            const fs::path out(cfg.output_dir);
            fs::create_directories(out);
            write_histogram_csv(hb, out / "entropy_bandwidth.csv");
            write_histogram_csv(hg, out / "entropy_gcn.csv");
            json r = provenance(cfg);
            r["log_base"] = "e";
            r["bins"] = *bins;
            r["bandwidth"] = to_json(hb);
            r["gcn"] = to_json(hg);
            write_json(r, out / "entropy.json");
            std::cout << std::fixed << std::setprecision(4) << "median ego entropy: bandwidth " << hb.median
                      << ", gcn " << hg.median << " (" << hb.samples << " nodes)\n";
        });
    }
    // components
    {
        auto opts = std::make_shared<RunOptions>();
        auto* cmd = dg->add_subcommand("components", "connected components of masked training graphs");
        add_run_options(cmd, *opts);
        cmd->callback([opts] {
            const RunConfig cfg = build_config(*opts);
            const Graph g = load_graph(cfg);
            const EdgeSplit s = repeat_split(g, cfg, 0);
            const Graph tg = train_graph(g, s);
            const Components base = count_components(tg);
            const double param =
                cfg.train.mask_kind == MaskKind::bandwidth ? cfg.train.temperature : cfg.train.mask_ratio;
            json runs = json::array();
            std::size_t increased = 0;
            for (std::size_t r = 0; r < cfg.repeats; ++r) {
                Rng rng = Rng::derive(cfg.train.seed + r, "components");
                const MaskSet ms = sample_masks(cfg.train.mask_kind, tg, param, 1, rng);
                const Components c = count_components(tg, &ms.layers[0]);
                increased += c.count > base.count;
                runs.push_back(to_json(c));
                std::cout << "seed " << cfg.train.seed + r << ": " << c.count << " components (giant " << c.giant
                          << ")\n";
            }
            std::cout << "unmasked: " << base.count << " components (giant " << base.giant << "); increased in "
                      << increased << "/" << cfg.repeats << '\n';
            json r = provenance(cfg);
            r["unmasked"] = to_json(base);
            r["masked"] = runs;
            r["increased"] = increased;
            write_json(r, fs::path(cfg.output_dir) / "components.json");
        });
    }
    // depth
    {
        auto opts = std::make_shared<RunOptions>();
        auto depths = std::make_shared<std::vector<std::size_t>>(std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8});
        auto* cmd = dg->add_subcommand("depth", "node probe accuracy against encoder depth");
        add_run_options(cmd, *opts);
        cmd->add_option("--depths", *depths, "encoder depths")->delimiter(',');
        cmd->callback([opts, depths] {
            const RunConfig base = build_config(*opts);
            const Graph g = load_graph(base);
            json rows = json::array();
            const fs::path out(base.output_dir);
            fs::create_directories(out);
            std::ofstream csv(out / "depth.csv");
            csv << "layers,acc_mean,acc_std\n";
            for (std::size_t k : *depths) {
                RunConfig cfg = base;
                cfg.train.num_layers = k;
                cfg.validate();
                const auto outcomes = run_repeats(g, cfg, {false, true}, opts->parallel);
                std::vector<double> acc;
                for (const auto& o : outcomes) acc.push_back(o.node->accuracy);
                const MeanStd m = mean_std(acc);
                rows.push_back(json{{"layers", k}, {"accuracy", to_json(m)}});
                csv << k << ',' << m.mean << ',' << m.std << '\n';
                std::cout << "K=" << k << ": accuracy " << format_mean_std(m) << '\n';
            }
            json r = provenance(base);
            r["rows"] = rows;
            write_json(r, out / "depth.json");
        });
    }
    // embed
    {
        struct EmbedOpts {
            std::string checkpoint, dataset, out = "runs";
        };
        auto o = std::make_shared<EmbedOpts>();
        auto* cmd = dg->add_subcommand("embed", "export eval-mode embeddings and a 2-d PCA projection");
        cmd->add_option("--checkpoint", o->checkpoint, "checkpoint file")->required();
        cmd->add_option("--dataset", o->dataset, "override the dataset recorded in the checkpoint");
        cmd->add_option("--out", o->out, "output directory");
        cmd->callback([o] {
            const Checkpoint ck = load_checkpoint(o->checkpoint);
            RunConfig cfg = config_of(ck);
            if (!o->dataset.empty()) cfg.dataset = o->dataset;
            const Graph g = load_graph(cfg);
            check_dims(ck, g);
            const Matrix z = link_embeddings(ck.params, g);
            const fs::path out(o->out);
            fs::create_directories(out);
            export_embeddings(z, out / "embeddings.csv");
            export_embeddings(pca2d(z), out / "pca.csv");
            std::cout << "wrote " << (out / "embeddings.csv").string() << " and " << (out / "pca.csv").string()
                      << '\n';
        });
    }
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"bandana: bandwidth-masked graph autoencoder toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "progress output on stderr");
    app.parse_complete_callback([&verbose] {
        if (verbose) logging::set_level(logging::Level::debug);
    });
    setup_dataset(app);
    setup_pretrain(app);
    setup_probe(app);
    setup_ablate(app);
    setup_diagnose(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace bandana::cli
