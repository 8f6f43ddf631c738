#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainsight/records.hpp"
#include "chainsight/store.hpp"

namespace chainsight::properties {

struct Shape {
    std::size_t rows = 1;
    std::size_t cols = 1;

    std::size_t size() const { return rows * cols; }
    bool scalar() const { return rows == 1 && cols == 1; }
    bool operator==(const Shape&) const = default;
};

// A per-tick time series. Every tick carries a rows x cols tensor (1x1 for
// scalar properties), stored row-major and concatenated in `values`.
struct PropertySeries {
    std::string name;
    std::vector<Timestamp> times;
    Shape shape;
    std::vector<double> values;
    std::string unit;

    std::size_t size() const { return times.size(); }
    std::span<const double> at(std::size_t i) const {
        return std::span<const double>(values).subspan(i * shape.size(), shape.size());
    }
    double scalar(std::size_t i) const { return values[i * shape.size()]; }
    void push(Timestamp t, std::span<const double> v);
    void push(Timestamp t, double v) { push(t, std::span<const double>(&v, 1)); }

    // Throws ValidationError unless times strictly increase and values match.
    void validate() const;
};

// Chain activity aggregated over one market tick [t, t + 3600).
struct TickChainStats {
    std::uint64_t block_count = 0;
    double size_sum = 0;
    double difficulty_sum = 0;
    double gas_limit_sum = 0;
    double gas_used_sum = 0;
    Timestamp first_block_time = 0;
    Timestamp last_block_time = 0;
    std::uint64_t tx_count = 0;
    std::uint64_t dapp_operations = 0;
    double gas_price_sum = 0;
    std::uint64_t unique_accounts = 0;
};

TickChainStats summarize_tick(std::span<const Block> blocks, std::span<const Transaction> txs,
                              std::uint64_t dapp_operations, std::uint64_t unique_accounts);

struct PropertyConfig {
    // Flat per-block issuance used for ETHSupply.
    double block_reward_eth = 5.0;
};

// Scalar property names in emission order.
const std::vector<std::string>& scalar_property_names();

// One series per scalar property over the ticks. ticks must be dense hourly
// (see align_ticks) and chain must hold one entry per tick. pendingTx is only
// emitted when supplied, and must cover the same times.
std::vector<PropertySeries> compute_scalar_properties(std::span<const MarketTick> ticks,
                                                      std::span<const TickChainStats> chain,
                                                      const PropertyConfig& config = {},
                                                      const PropertySeries* pending_tx = nullptr);

// values[i+1] - values[i], stamped with the later time; named <name>_rel.
PropertySeries to_relative(const PropertySeries& series);

// Dense hourly ticks for [start, end). A missing hour is a CoverageGap unless
// forward_fill, which repeats the previous tick's prices with zero volume.
std::vector<MarketTick> align_ticks(std::span<const MarketTick> ticks, Timestamp start, Timestamp end,
                                    bool forward_fill = false);

// Store persistence under "prop.<name>".
std::string store_series_name(const std::string& property);
void put_series(ingest::Store& store, const PropertySeries& series);
PropertySeries get_series(const ingest::Store& store, const std::string& name, Timestamp from, Timestamp to);
PropertySeries get_series(const ingest::Store& store, const std::string& name);

std::string encode_tensor(Shape shape, std::span<const double> values);
Shape decode_tensor(std::string_view payload, std::vector<double>& out);

// CSV "time,value"; scalar series only.
void write_csv(const PropertySeries& series, const std::filesystem::path& path);

} // namespace chainsight::properties
