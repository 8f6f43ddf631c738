// chainsight: batch pipeline from raw chain and market data to evaluated
// predictors. Run `chainsight --help` for the subcommands.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chainsight/errors.hpp"
#include "chainsight/fixture.hpp"
#include "chainsight/pipeline.hpp"

namespace cs = chainsight;
namespace pl = chainsight::pipeline;

namespace {

struct Overrides {
    std::string config;
    std::string store;
    std::optional<int> preset;
    std::optional<std::size_t> wn;
    std::optional<std::string> norm;
    std::optional<std::string> target;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> model;
    std::optional<std::size_t> epochs;
    bool fit_train_only = false;
    bool skip_bad_records = false;
    bool forward_fill = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "pipeline config (JSON)");
    cmd->add_option("--store", o.store, "store directory (overrides CHAINSIGHT_STORE and config)");
    cmd->add_option("--preset", o.preset, "dataset preset 1..8");
    cmd->add_option("--wn", o.wn, "window length in ticks");
    cmd->add_option("--norm", o.norm, "basic|around_zero|image|prop");
    cmd->add_option("--target", o.target, "target property, e.g. highPrice_rel");
    cmd->add_option("--seed", o.seed, "seed for initialization and shuffling");
    cmd->add_option("--threads", o.threads, "worker cap");
    cmd->add_option("--model", o.model, "persistence|null|linear|mlp");
    cmd->add_option("--epochs", o.epochs, "training epochs");
    cmd->add_flag("--fit-train-only", o.fit_train_only, "fit normalization on the training range only");
    cmd->add_flag("--skip-bad-records", o.skip_bad_records, "drop malformed input lines");
    cmd->add_flag("--forward-fill", o.forward_fill, "fill missing market hours");
}

pl::PipelineConfig resolve(const Overrides& o) {
    pl::PipelineConfig cfg;
    if (!o.config.empty()) cfg = pl::load_config(o.config);
    else cfg = pl::config_from_json(nlohmann::json::object(), ".");
    if (const char* env = std::getenv("CHAINSIGHT_STORE"); env && *env) cfg.store = env;
    if (!o.store.empty()) cfg.store = o.store;
    if (o.preset) {
        cfg.preset = *o.preset;
        cfg.properties.clear();
    }
    if (o.wn) cfg.wn = *o.wn;
    if (o.norm) cfg.norm = cs::datasetgen::parse_norm_choice(*o.norm);
    if (o.target) cfg.target = *o.target;
    if (o.seed) cfg.seed = cfg.train.seed = *o.seed;
    if (o.threads) cfg.threads = *o.threads;
    if (o.model) cfg.model = cs::modeling::parse_predictor_kind(*o.model);
    if (o.epochs) cfg.train.epochs = *o.epochs;
    if (o.fit_train_only) cfg.fit_train_only = true;
    if (o.skip_bad_records) cfg.skip_bad_records = true;
    if (o.forward_fill) cfg.forward_fill = true;
    cfg.validate();
    return cfg;
}

void print_metrics(const cs::modeling::MetricsReport& m) {
    fmt::print("n={} mse={:.6g} rmse={:.6g} r2={:.6g} r2_mean={:.6g} sign={:.4f}\n", m.n, m.mse, m.rmse, m.r2, m.r2_mean,
               m.sign);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chainsight: blockchain and market data to price-prediction datasets"};
    app.require_subcommand(1);
    Overrides o;

    auto* ingest = app.add_subcommand("ingest", "load raw blocks, transactions, traces and ticks into the store");
    auto* props = app.add_subcommand("properties", "derive scalar per-tick properties");
    auto* dists = app.add_subcommand("distributions", "derive per-tick account distributions");
    auto* dataset = app.add_subcommand("dataset", "build the windowed dataset file");
    auto* train = app.add_subcommand("train", "train a predictor on the training split");
    auto* evaluate = app.add_subcommand("evaluate", "score a predictor on the test split");
    auto* plot = app.add_subcommand("export-plot", "write CSV series and PGM frames");
    auto* all = app.add_subcommand("run-all", "every stage in order");
    for (auto* c : {ingest, props, dists, dataset, train, evaluate, plot, all}) add_common(c, o);

    auto* gen = app.add_subcommand("generate-fixture", "write a synthetic chain, ticks and config");
    std::uint64_t gen_seed = 7, gen_blocks = 1000, gen_accounts = 200;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--blocks", gen_blocks, "number of blocks");
    gen->add_option("--accounts", gen_accounts, "number of accounts");
    gen->add_option("--out", gen_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            auto info = pl::generate_fixture(gen_seed, gen_blocks, gen_accounts, gen_out);
            fmt::print("fixture: {} transactions, {} contracts, ticks [{}, {}), boundary {}\nconfig: {}\n",
                       info.transaction_count, info.contract_count, info.start, info.end, info.boundary,
                       info.config.string());
            return 0;
        }
        auto cfg = resolve(o);
        if (ingest->parsed()) {
            auto s = pl::run_ingest(cfg);
            fmt::print("ingested {} blocks, {} transactions, {} traces, {} ticks ({} skipped)\n", s.blocks, s.transactions,
                       s.traces, s.ticks, s.skipped);
            for (auto [lo, hi] : s.chain.gaps) fmt::print(stderr, "warning: blocks {}..{} missing\n", lo, hi);
            for (auto n : s.chain.timestamp_regressions) fmt::print(stderr, "warning: block {} goes back in time\n", n);
        } else if (props->parsed()) {
            auto series = pl::run_properties(cfg);
            fmt::print("{} properties over {} ticks\n", series.size(), series.empty() ? 0 : series[0].size());
        } else if (dists->parsed()) {
            auto names = pl::run_distributions(cfg);
            fmt::print("{} distributions\n", names.size());
        } else if (dataset->parsed()) {
            auto ds = pl::run_dataset(cfg);
            fmt::print("dataset: {} samples of {} values -> {}\n", ds.size(), ds.sample_size(), pl::dataset_path(cfg).string());
        } else if (train->parsed()) {
            auto r = pl::run_train(cfg);
            if (!r.loss_history.empty())
                fmt::print("trained {} epochs, final loss {:.6g}, kept epoch {}\n", r.loss_history.size(), r.loss_history.back(),
                           r.best_epoch.value_or(0));
            else
                fmt::print("nothing to train for model {}\n", cs::modeling::to_string(cfg.model));
        } else if (evaluate->parsed()) {
            std::optional<cs::modeling::PredictorKind> kind;
            if (o.model) kind = cfg.model;
            print_metrics(pl::run_evaluate(cfg, kind));
        } else if (plot->parsed()) {
            auto paths = pl::run_export_plot(cfg);
            fmt::print("{} files under {}\n", paths.size(), pl::plots_dir(cfg).string());
        } else if (all->parsed()) {
            print_metrics(pl::run_all(cfg));
        }
        return 0;
    } catch (const cs::IoError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const cs::Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
}
