#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainsight/dataset.hpp"
#include "chainsight/ingest.hpp"
#include "chainsight/ledger.hpp"
#include "chainsight/modeling.hpp"
#include "chainsight/properties.hpp"
#include "chainsight/store.hpp"

namespace chainsight::pipeline {

struct RpcSource {
    std::string endpoint;
    std::uint64_t from = 0;
    std::uint64_t to = 0;
};

// JSON schema (all keys optional; relative paths resolve against the config
// file's directory):
//
//   blocks, transactions, traces, ticks    input files
//   rpc {endpoint, from, to}               fetch blocks instead of reading `blocks`/`transactions`
//   store                                  store directory (default "store")
//   start, end, boundary                   unix seconds or ISO dates ("2017-10-01", "...T00:00:00Z")
//   preset                                 1..8, or
//   properties [names], layout             explicit window spec ("matrix" | "stacked")
//   wn, norm, target, fit_train_only, forward_fill, skip_bad_records
//   model                                  persistence | null | linear | mlp
//   hidden, seed, threads
//   train {batch_size, learning_rate, epochs, adam_beta1, adam_beta2, adam_eps, select_best_on_test}
//   ledger {miner_reward_wei, debit_gas_fees, erc20_selectors}
//   block_reward_eth
struct PipelineConfig {
    std::optional<std::filesystem::path> blocks;
    std::optional<std::filesystem::path> transactions;
    std::optional<std::filesystem::path> traces;
    std::optional<std::filesystem::path> ticks;
    std::optional<RpcSource> rpc;
    std::filesystem::path store = "store";

    Timestamp start = datasetgen::default_range_start;
    Timestamp end = datasetgen::default_range_end;
    Timestamp boundary = datasetgen::default_split_boundary;

    int preset = 8;
    std::vector<std::string> properties; // overrides preset when non-empty
    datasetgen::Model layout = datasetgen::Model::matrix;
    std::size_t wn = 8;
    datasetgen::NormChoice norm = datasetgen::NormChoice::prop;
    std::string target = "highPrice";
    bool fit_train_only = false;
    bool forward_fill = false;
    bool skip_bad_records = false;

    modeling::PredictorKind model = modeling::PredictorKind::linear;
    std::size_t hidden = 64;
    modeling::TrainConfig train;
    bool select_best_on_test = false;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    ledger::LedgerConfig ledger;
    properties::PropertyConfig property_config;

    // ConfigError on violated invariants (start < boundary < end, wn >= 1, ...).
    void validate() const;
};

Timestamp parse_time(const nlohmann::json& value, const std::string& field);

// Throws ConfigError for bad fields, IoError when the file is unreadable.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Artifact locations under the store directory.
std::filesystem::path dataset_path(const PipelineConfig& cfg);
std::filesystem::path checkpoint_path(const PipelineConfig& cfg);
std::filesystem::path train_log_path(const PipelineConfig& cfg);
std::filesystem::path metrics_path(const PipelineConfig& cfg);
std::filesystem::path predictions_path(const PipelineConfig& cfg);
std::filesystem::path plots_dir(const PipelineConfig& cfg);

inline constexpr const char* raw_blocks = "raw.blocks";
inline constexpr const char* raw_transactions = "raw.transactions";
inline constexpr const char* raw_traces = "raw.traces";
inline constexpr const char* raw_ticks = "raw.ticks";

struct IngestSummary {
    std::uint64_t blocks = 0;
    std::uint64_t transactions = 0;
    std::uint64_t traces = 0;
    std::uint64_t ticks = 0;
    std::uint64_t skipped = 0;
    ingest::ValidationReport chain;
};

// Chain activity and ledger state at the close of one tick.
struct TickState {
    Timestamp tick = 0; // tick start
    ledger::LedgerSnapshot snapshot;
    properties::TickChainStats stats;
};

// Replays every stored block in order and reports each tick of
// [cfg.start, cfg.end) once all blocks before its end are applied.
ledger::ReplayReport replay_ticks(const ingest::Store& store, const PipelineConfig& cfg,
                                  const std::function<void(TickState&&)>& on_tick);

IngestSummary run_ingest(const PipelineConfig& cfg);
std::vector<properties::PropertySeries> run_properties(const PipelineConfig& cfg);
std::vector<std::string> run_distributions(const PipelineConfig& cfg);
datasetgen::Dataset run_dataset(const PipelineConfig& cfg);
modeling::TrainResult run_train(const PipelineConfig& cfg);
// Baseline kinds (persistence, null) need no checkpoint.
modeling::MetricsReport run_evaluate(const PipelineConfig& cfg, std::optional<modeling::PredictorKind> baseline = std::nullopt);
std::vector<std::filesystem::path> run_export_plot(const PipelineConfig& cfg);
modeling::MetricsReport run_all(const PipelineConfig& cfg);

nlohmann::ordered_json metrics_json(const modeling::MetricsReport& m, std::string_view model, const std::string& target);

} // namespace chainsight::pipeline
