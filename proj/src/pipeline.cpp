#include "chainsight/pipeline.hpp"

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "chainsight/bytes.hpp"
#include "chainsight/distributions.hpp"
#include "chainsight/errors.hpp"
#include "chainsight/rpc.hpp"

namespace chainsight::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    if (!(start < boundary)) throw ConfigError("boundary", "must be after start");
    if (!(boundary < end)) throw ConfigError("boundary", "must be before end");
    if (start % tick_span != 0) throw ConfigError("start", "must be on an hour boundary");
    if (end % tick_span != 0) throw ConfigError("end", "must be on an hour boundary");
    if (wn < 1) throw ConfigError("wn", "must be at least 1");
    if (properties.empty() && (preset < 1 || preset > 8)) throw ConfigError("preset", "must be 1..8");
    if (threads < 1) throw ConfigError("threads", "must be at least 1");
    if (target.empty()) throw ConfigError("target", "must be set");
    if (store.empty()) throw ConfigError("store", "must be set");
    try {
        train.validate();
    } catch (const ValidationError& e) {
        throw ConfigError("train", e.what());
    }
}

Timestamp parse_time(const json& value, const std::string& field) {
    if (value.is_number_integer()) return value.get<Timestamp>();
    if (!value.is_string()) throw ConfigError(field, "expected unix seconds or an ISO date");
    auto s = value.get<std::string>();
    std::tm tm{};
    std::istringstream in(s);
    if (s.size() == 10) in >> std::get_time(&tm, "%Y-%m-%d");
    else {
        in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
        if (!in.fail() && in.peek() == 'Z') in.get();
    }
    if (in.fail() || in.peek() != std::char_traits<char>::eof()) throw ConfigError(field, "cannot parse time '" + s + "'");
    return static_cast<Timestamp>(timegm(&tm));
}

namespace {

template <class T>
T get_field(const json& j, const char* key, const std::string& field) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
    }
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

PipelineConfig config_from_json(const json& j, const fs::path& base) {
    if (!j.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    static const std::vector<std::string> known{
        "blocks", "transactions", "traces", "ticks", "rpc", "store", "start", "end", "boundary", "preset",
        "properties", "layout", "wn", "norm", "target", "fit_train_only", "forward_fill", "skip_bad_records",
        "model", "hidden", "seed", "threads", "train", "ledger", "block_reward_eth"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(key, "unknown field");

    PipelineConfig c;
    for (const char* key : {"blocks", "transactions", "traces", "ticks"}) {
        if (!j.contains(key)) continue;
        auto p = resolve_path(base, get_field<std::string>(j, key, key));
        if (std::string_view(key) == "blocks") c.blocks = p;
        else if (std::string_view(key) == "transactions") c.transactions = p;
        else if (std::string_view(key) == "traces") c.traces = p;
        else c.ticks = p;
    }
    if (j.contains("rpc")) {
        const auto& r = j.at("rpc");
        c.rpc = RpcSource{get_field<std::string>(r, "endpoint", "rpc.endpoint"), get_field<std::uint64_t>(r, "from", "rpc.from"),
                          get_field<std::uint64_t>(r, "to", "rpc.to")};
        if (c.rpc->from > c.rpc->to) throw ConfigError("rpc", "from must not exceed to");
    }
    if (j.contains("store")) c.store = resolve_path(base, get_field<std::string>(j, "store", "store"));
    else c.store = base / "store";
    if (j.contains("start")) c.start = parse_time(j.at("start"), "start");
    if (j.contains("end")) c.end = parse_time(j.at("end"), "end");
    if (j.contains("boundary")) c.boundary = parse_time(j.at("boundary"), "boundary");
    if (j.contains("preset")) c.preset = get_field<int>(j, "preset", "preset");
    if (j.contains("properties")) c.properties = get_field<std::vector<std::string>>(j, "properties", "properties");
    try {
        if (j.contains("layout")) c.layout = datasetgen::parse_model(get_field<std::string>(j, "layout", "layout"));
        if (j.contains("norm")) c.norm = datasetgen::parse_norm_choice(get_field<std::string>(j, "norm", "norm"));
        if (j.contains("model")) c.model = modeling::parse_predictor_kind(get_field<std::string>(j, "model", "model"));
    } catch (const ConfigError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ConfigError("layout/norm/model", e.what());
    }
    if (j.contains("wn")) c.wn = get_field<std::size_t>(j, "wn", "wn");
    if (j.contains("target")) c.target = get_field<std::string>(j, "target", "target");
    if (j.contains("fit_train_only")) c.fit_train_only = get_field<bool>(j, "fit_train_only", "fit_train_only");
    if (j.contains("forward_fill")) c.forward_fill = get_field<bool>(j, "forward_fill", "forward_fill");
    if (j.contains("skip_bad_records")) c.skip_bad_records = get_field<bool>(j, "skip_bad_records", "skip_bad_records");
    if (j.contains("hidden")) c.hidden = get_field<std::size_t>(j, "hidden", "hidden");
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", "seed");
    if (j.contains("threads")) c.threads = get_field<unsigned>(j, "threads", "threads");
    if (j.contains("block_reward_eth")) c.property_config.block_reward_eth = get_field<double>(j, "block_reward_eth", "block_reward_eth");

    if (j.contains("train")) {
        const auto& t = j.at("train");
        if (t.contains("batch_size")) c.train.batch_size = get_field<std::size_t>(t, "batch_size", "train.batch_size");
        if (t.contains("learning_rate")) c.train.learning_rate = get_field<double>(t, "learning_rate", "train.learning_rate");
        if (t.contains("epochs")) c.train.epochs = get_field<std::size_t>(t, "epochs", "train.epochs");
        if (t.contains("adam_beta1")) c.train.adam_beta1 = get_field<double>(t, "adam_beta1", "train.adam_beta1");
        if (t.contains("adam_beta2")) c.train.adam_beta2 = get_field<double>(t, "adam_beta2", "train.adam_beta2");
        if (t.contains("adam_eps")) c.train.adam_eps = get_field<double>(t, "adam_eps", "train.adam_eps");
        if (t.contains("select_best_on_test"))
            c.select_best_on_test = get_field<bool>(t, "select_best_on_test", "train.select_best_on_test");
    }
    if (j.contains("ledger")) {
        const auto& l = j.at("ledger");
        if (l.contains("miner_reward_wei")) {
            const auto& v = l.at("miner_reward_wei");
            std::string text = v.is_string() ? v.get<std::string>() : v.dump();
            if (!Amount::parse(text, c.ledger.miner_reward) || c.ledger.miner_reward.saturated)
                throw ConfigError("ledger.miner_reward_wei", "not a wei amount: " + text);
        }
        if (l.contains("debit_gas_fees")) c.ledger.debit_gas_fees = get_field<bool>(l, "debit_gas_fees", "ledger.debit_gas_fees");
        if (l.contains("erc20_selectors"))
            c.ledger.erc20_selectors = get_field<std::vector<std::string>>(l, "erc20_selectors", "ledger.erc20_selectors");
    }
    c.train.seed = c.seed;
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("<root>", "not valid JSON: " + path.string());
    return config_from_json(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

fs::path dataset_path(const PipelineConfig& cfg) { return cfg.store / "dataset.bpd"; }
fs::path checkpoint_path(const PipelineConfig& cfg) { return cfg.store / "model.ckpt"; }
fs::path train_log_path(const PipelineConfig& cfg) { return cfg.store / "train.json"; }
fs::path metrics_path(const PipelineConfig& cfg) { return cfg.store / "metrics.json"; }
fs::path predictions_path(const PipelineConfig& cfg) { return cfg.store / "predictions.csv"; }
fs::path plots_dir(const PipelineConfig& cfg) { return cfg.store / "plots"; }

namespace {

// Raw payloads carry their input ordinal so identical records stay distinct.
std::string raw_payload(std::uint64_t ordinal, const std::string& body) {
    std::string out;
    bytes::append_le<std::uint64_t>(out, ordinal);
    out += body;
    return out;
}

std::string_view raw_body(const std::string& payload) {
    if (payload.size() < 8) throw TruncatedPayload("raw record shorter than its ordinal");
    return std::string_view(payload).substr(8);
}

class SeriesWriter {
  public:
    SeriesWriter(ingest::Store& store, std::string series) : store_(store), series_(std::move(series)) {
        store_.erase(series_);
        store_.put(series_, {});
    }
    void add(Timestamp t, const std::string& body) {
        buf_.push_back({t, raw_payload(count_++, body)});
        if (buf_.size() >= 4096) flush();
    }
    void flush() {
        if (buf_.empty()) return;
        store_.put(series_, buf_);
        buf_.clear();
    }
    std::uint64_t count() const { return count_; }

  private:
    ingest::Store& store_;
    std::string series_;
    std::vector<ingest::StoreRecord> buf_;
    std::uint64_t count_ = 0;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

void require_file(const std::optional<fs::path>& p, const char* stage, const char* what) {
    if (!p) throw MissingInput(stage, std::string(what) + " (not configured)");
    if (!fs::exists(*p)) throw MissingInput(stage, std::string(what) + " " + p->string());
}

void require_series(const ingest::Store& store, const std::string& series, const char* stage) {
    if (!store.has_series(series)) throw MissingInput(stage, "store series " + series);
}

} // namespace

IngestSummary run_ingest(const PipelineConfig& cfg) {
    cfg.validate();
    require_file(cfg.ticks, "ingest", "ticks");
    if (!cfg.rpc) {
        require_file(cfg.blocks, "ingest", "blocks");
        require_file(cfg.transactions, "ingest", "transactions");
    }
    ingest::Store store(cfg.store);
    ingest::ReadOptions opts{cfg.skip_bad_records};
    IngestSummary summary;
    ingest::ChainValidator validator;
    std::map<std::uint64_t, Timestamp> block_time;

    {
        SeriesWriter blocks(store, raw_blocks);
        SeriesWriter txs(store, raw_transactions);
        if (cfg.rpc) {
            auto fetcher = ingest::fetch_blocks_rpc(cfg.rpc->endpoint, cfg.rpc->from, cfg.rpc->to);
            while (auto b = fetcher.next()) {
                validator.add(b->block);
                block_time[b->block.number] = b->block.timestamp;
                blocks.add(b->block.timestamp, ingest::to_jsonl(b->block));
                for (const auto& tx : b->transactions) txs.add(b->block.timestamp, ingest::to_jsonl(tx));
            }
        } else {
            auto reader = ingest::read_blocks(*cfg.blocks, opts);
            while (auto b = reader.next()) {
                validator.add(*b);
                block_time[b->number] = b->timestamp;
                blocks.add(b->timestamp, ingest::to_jsonl(*b));
            }
            summary.skipped += reader.skipped();
            auto txr = ingest::read_transactions(*cfg.transactions, opts);
            while (auto tx = txr.next()) {
                auto it = block_time.find(tx->block_number);
                if (it == block_time.end())
                    throw ValidationError(fmt::format("transaction at line {} references unknown block {}", txr.line_no(), tx->block_number));
                txs.add(it->second, ingest::to_jsonl(*tx));
            }
            summary.skipped += txr.skipped();
        }
        blocks.flush();
        txs.flush();
        summary.blocks = blocks.count();
        summary.transactions = txs.count();
    }
    {
        SeriesWriter traces(store, raw_traces);
        if (cfg.traces) {
            require_file(cfg.traces, "ingest", "traces");
            auto tr = ingest::read_traces(*cfg.traces, opts);
            while (auto t = tr.next()) {
                auto it = block_time.find(t->block_number);
                if (it == block_time.end())
                    throw ValidationError(fmt::format("trace at line {} references unknown block {}", tr.line_no(), t->block_number));
                traces.add(it->second, ingest::to_jsonl(*t));
            }
            summary.skipped += tr.skipped();
        }
        traces.flush();
        summary.traces = traces.count();
    }
    {
        SeriesWriter ticks(store, raw_ticks);
        auto tr = ingest::read_ticks(*cfg.ticks, opts);
        while (auto t = tr.next()) ticks.add(t->time, ingest::to_csv_row(*t));
        ticks.flush();
        summary.skipped += tr.skipped();
        summary.ticks = ticks.count();
    }
    summary.chain = validator.report();
    return summary;
}

ledger::ReplayReport replay_ticks(const ingest::Store& store, const PipelineConfig& cfg,
                                  const std::function<void(TickState&&)>& on_tick) {
    require_series(store, raw_blocks, "replay");
    require_series(store, raw_transactions, "replay");
    ledger::Ledger led(cfg.ledger);

    Timestamp tick = cfg.start;
    std::vector<Block> tick_blocks;
    std::vector<Transaction> tick_txs;
    std::uint64_t tick_dapp = 0;

    auto close_tick = [&] {
        TickState st;
        st.tick = tick;
        st.snapshot = led.snapshot_at_tick(tick + tick_span);
        st.stats = properties::summarize_tick(tick_blocks, tick_txs, tick_dapp, st.snapshot.unique_accounts);
        tick_blocks.clear();
        tick_txs.clear();
        tick_dapp = 0;
        on_tick(std::move(st));
        tick += tick_span;
    };

    auto starts = store.chunk_starts(raw_blocks);
    const bool have_traces = store.has_series(raw_traces);
    const Timestamp span = store.chunk_span();
    bool done = false;
    for (Timestamp day : starts) {
        if (done || day >= cfg.end) break;
        auto blocks = store.get(raw_blocks, day, day + span);
        auto txs = store.get(raw_transactions, day, day + span);
        std::vector<ingest::StoreRecord> trs;
        if (have_traces) trs = store.get(raw_traces, day, day + span);

        std::map<std::uint64_t, std::vector<Transaction>> txs_by_block;
        for (const auto& r : txs) {
            auto tx = ingest::parse_transaction(raw_body(r.payload));
            txs_by_block[tx.block_number].push_back(std::move(tx));
        }
        std::map<std::uint64_t, std::vector<Trace>> traces_by_block;
        for (const auto& r : trs) {
            auto t = ingest::parse_trace(raw_body(r.payload));
            traces_by_block[t.block_number].push_back(std::move(t));
        }

        for (const auto& r : blocks) {
            auto b = ingest::parse_block(raw_body(r.payload));
            if (b.timestamp >= cfg.end) {
                done = true;
                break;
            }
            while (b.timestamp >= tick + tick_span) close_tick();
            static const std::vector<Transaction> no_txs;
            static const std::vector<Trace> no_traces;
            auto ti = txs_by_block.find(b.number);
            auto ri = traces_by_block.find(b.number);
            const auto& btx = ti == txs_by_block.end() ? no_txs : ti->second;
            const auto& btr = ri == traces_by_block.end() ? no_traces : ri->second;
            auto effects = led.apply_block(b, btx, btr);
            if (b.timestamp >= cfg.start) {
                tick_blocks.push_back(b);
                tick_txs.insert(tick_txs.end(), btx.begin(), btx.end());
                tick_dapp += effects.dapp_operations;
            }
        }
    }
    while (tick < cfg.end) close_tick();
    return led.report();
}

std::vector<properties::PropertySeries> run_properties(const PipelineConfig& cfg) {
    cfg.validate();
    ingest::Store store(cfg.store);
    require_series(store, raw_ticks, "properties");

    std::vector<properties::TickChainStats> chain;
    replay_ticks(store, cfg, [&](TickState&& st) { chain.push_back(st.stats); });

    std::vector<MarketTick> ticks;
    for (const auto& r : store.get(raw_ticks, cfg.start, cfg.end)) ticks.push_back(ingest::parse_tick(raw_body(r.payload)));
    auto dense = properties::align_ticks(ticks, cfg.start, cfg.end, cfg.forward_fill);
    auto series = properties::compute_scalar_properties(dense, chain, cfg.property_config);
    for (const auto& s : series) {
        store.erase(properties::store_series_name(s.name));
        properties::put_series(store, s);
    }
    return series;
}

std::vector<std::string> run_distributions(const PipelineConfig& cfg) {
    cfg.validate();
    ingest::Store store(cfg.store);
    auto configs = distributions::builtin_configs();
    const std::size_t n_dist = configs.size() + 1;

    std::vector<std::vector<distributions::DistributionMatrix>> frames(n_dist);
    std::vector<Timestamp> times;
    std::vector<TickState> pending;

    auto compute = [&](const TickState& st, std::size_t slot, std::vector<std::vector<distributions::DistributionMatrix>>& out) {
        out[0][slot] = distributions::account_balance_distribution(st.snapshot);
        for (std::size_t k = 0; k < configs.size(); ++k)
            out[k + 1][slot] = distributions::account_number_distribution(st.snapshot, configs[k]);
    };
    // Batches of ticks are binned concurrently; each worker owns fixed slots,
    // so the result does not depend on the thread count.
    auto flush = [&] {
        if (pending.empty()) return;
        std::vector<std::vector<distributions::DistributionMatrix>> batch(
            n_dist, std::vector<distributions::DistributionMatrix>(pending.size()));
        const std::size_t workers = std::min<std::size_t>(cfg.threads, pending.size());
        if (workers <= 1) {
            for (std::size_t i = 0; i < pending.size(); ++i) compute(pending[i], i, batch);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(workers);
            for (std::size_t w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    try {
                        for (std::size_t i = w; i < pending.size(); i += workers) compute(pending[i], i, batch);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            for (auto& t : pool) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (std::size_t k = 0; k < n_dist; ++k)
            frames[k].insert(frames[k].end(), std::make_move_iterator(batch[k].begin()), std::make_move_iterator(batch[k].end()));
        pending.clear();
    };

    replay_ticks(store, cfg, [&](TickState&& st) {
        times.push_back(st.tick);
        pending.push_back(std::move(st));
        if (pending.size() >= 8 * static_cast<std::size_t>(cfg.threads)) flush();
    });
    flush();

    std::vector<std::string> names{std::string(distributions::balance_distribution_name)};
    for (const auto& c : configs) names.push_back(c.name);
    for (std::size_t k = 0; k < n_dist; ++k) {
        auto s = distributions::to_property_series(names[k], frames[k], times);
        store.erase(properties::store_series_name(s.name));
        properties::put_series(store, s);
    }
    return names;
}

namespace {

datasetgen::PropertyProvider store_provider(const ingest::Store& store, const PipelineConfig& cfg) {
    return [&store, &cfg](const std::string& name) {
        if (!store.has_series(properties::store_series_name(name))) throw MissingProperty(name);
        return properties::get_series(store, name, cfg.start, cfg.end);
    };
}

std::pair<datasetgen::Dataset, datasetgen::Dataset> load_split(const PipelineConfig& cfg, const char* stage) {
    if (!fs::exists(dataset_path(cfg))) throw MissingInput(stage, "dataset " + dataset_path(cfg).string());
    auto ds = datasetgen::read_dataset(dataset_path(cfg));
    return datasetgen::split_train_test(ds, cfg.boundary);
}

} // namespace

datasetgen::Dataset run_dataset(const PipelineConfig& cfg) {
    cfg.validate();
    ingest::Store store(cfg.store);
    auto provider = store_provider(store, cfg);
    std::optional<Timestamp> fit_before;
    if (cfg.fit_train_only) fit_before = cfg.boundary;
    datasetgen::Dataset ds;
    if (!cfg.properties.empty()) {
        datasetgen::DatasetSpec spec;
        spec.properties = cfg.properties;
        spec.target = cfg.target;
        spec.wn = cfg.wn;
        spec.norm = cfg.norm;
        spec.model = cfg.layout;
        spec.fit_before = fit_before;
        ds = datasetgen::build_dataset(spec, provider);
    } else {
        ds = datasetgen::build_preset(cfg.preset, cfg.wn, cfg.norm, cfg.target, provider, fit_before);
    }
    fs::create_directories(cfg.store);
    datasetgen::write_dataset(ds, dataset_path(cfg));
    return ds;
}

modeling::TrainResult run_train(const PipelineConfig& cfg) {
    cfg.validate();
    auto [train_set, test_set] = load_split(cfg, "train");
    auto p = modeling::Predictor::make(cfg.model, train_set.input_shape, cfg.hidden, cfg.seed);
    auto result = modeling::train(p, train_set, cfg.train, cfg.select_best_on_test ? &test_set : nullptr);
    modeling::write_checkpoint(p, checkpoint_path(cfg));

    nlohmann::ordered_json log = {{"model", modeling::to_string(p.kind())},
                                  {"epochs", cfg.train.epochs},
                                  {"train_samples", train_set.size()},
                                  {"loss_history", result.loss_history},
                                  {"selection", cfg.select_best_on_test ? "test_mse" : "train_loss"}};
    if (result.best_epoch) log["best_epoch"] = *result.best_epoch;
    write_text(train_log_path(cfg), log.dump(2) + "\n");
    return result;
}

nlohmann::ordered_json metrics_json(const modeling::MetricsReport& m, std::string_view model, const std::string& target) {
    return {{"model", model}, {"target", target}, {"n", m.n},     {"mse", m.mse},
            {"rmse", m.rmse}, {"r2", m.r2},        {"r2_mean_baseline", m.r2_mean},
            {"sign", m.sign}, {"sign_n", m.sign_n}};
}

modeling::MetricsReport run_evaluate(const PipelineConfig& cfg, std::optional<modeling::PredictorKind> baseline) {
    cfg.validate();
    auto [train_set, test_set] = load_split(cfg, "evaluate");
    std::optional<modeling::Predictor> p;
    if (baseline && *baseline == modeling::PredictorKind::persistence) p = modeling::Predictor::persistence();
    else if (baseline && *baseline == modeling::PredictorKind::null_half) p = modeling::Predictor::null_half();
    else {
        if (!fs::exists(checkpoint_path(cfg))) throw MissingInput("evaluate", "checkpoint " + checkpoint_path(cfg).string());
        p = modeling::read_checkpoint(checkpoint_path(cfg));
        if (baseline && p->kind() != *baseline)
            throw ValidationError(fmt::format("checkpoint holds a {} model, not {}", modeling::to_string(p->kind()),
                                              modeling::to_string(*baseline)));
    }
    auto m = modeling::evaluate(*p, test_set);
    write_text(metrics_path(cfg), metrics_json(m, modeling::to_string(p->kind()), test_set.target_name).dump(2) + "\n");
    modeling::export_predictions(*p, test_set, predictions_path(cfg));
    return m;
}

std::vector<fs::path> run_export_plot(const PipelineConfig& cfg) {
    cfg.validate();
    ingest::Store store(cfg.store);
    std::vector<fs::path> written;
    fs::create_directories(plots_dir(cfg));
    for (const auto& series : store.list_series()) {
        if (!series.starts_with("prop.")) continue;
        auto s = properties::get_series(store, series.substr(5), cfg.start, cfg.end);
        if (s.shape.scalar()) {
            auto path = plots_dir(cfg) / (s.name + ".csv");
            properties::write_csv(s, path);
            written.push_back(path);
            continue;
        }
        std::vector<distributions::DistributionMatrix> frames;
        for (std::size_t i = 0; i < s.size(); ++i) {
            auto v = s.at(i);
            frames.push_back({s.times[i], s.shape.rows, s.shape.cols, std::vector<double>(v.begin(), v.end())});
        }
        auto dir = plots_dir(cfg) / s.name;
        fs::remove_all(dir);
        auto paths = distributions::export_frames(frames, dir);
        written.insert(written.end(), paths.begin(), paths.end());
    }
    return written;
}

modeling::MetricsReport run_all(const PipelineConfig& cfg) {
    run_ingest(cfg);
    run_properties(cfg);
    run_distributions(cfg);
    run_dataset(cfg);
    run_train(cfg);
    auto m = run_evaluate(cfg);
    run_export_plot(cfg);
    return m;
}

} // namespace chainsight::pipeline
