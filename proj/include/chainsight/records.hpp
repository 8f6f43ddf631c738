#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "chainsight/amount.hpp"

namespace chainsight {

// Unix seconds.
using Timestamp = std::int64_t;

inline constexpr Timestamp tick_span = 3600;

// Start of the hourly tick containing t.
constexpr Timestamp tick_floor(Timestamp t) {
    Timestamp q = t / tick_span;
    if (t % tick_span != 0 && t < 0) --q;
    return q * tick_span;
}

struct Block {
    Timestamp timestamp = 0;
    std::uint64_t number = 0;
    std::string miner;
    std::uint64_t size_bytes = 0;
    Amount difficulty;
    std::uint64_t gas_limit = 0;
    std::uint64_t gas_used = 0;
    std::uint32_t tx_count = 0;

    bool operator==(const Block&) const = default;
};

struct Transaction {
    std::uint64_t block_number = 0;
    std::string from;
    std::string to; // empty for contract creation
    Amount value_wei;
    std::uint64_t gas_used = 0;
    Amount gas_price_wei;
    std::optional<std::string> input_selector; // 8 lowercase hex digits, no 0x

    bool is_contract_creation() const { return to.empty(); }
    bool operator==(const Transaction&) const = default;
};

enum class TraceKind { call, create };

struct Trace {
    std::uint64_t block_number = 0;
    std::string from;
    std::string to;
    Amount value_wei;
    TraceKind kind = TraceKind::call;

    bool operator==(const Trace&) const = default;
};

struct MarketTick {
    Timestamp time = 0;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double volume_from = 0;
    double volume_to = 0;

    bool operator==(const MarketTick&) const = default;
};

} // namespace chainsight
