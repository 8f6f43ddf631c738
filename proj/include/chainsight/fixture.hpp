#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "chainsight/records.hpp"

namespace chainsight::pipeline {

struct FixtureInfo {
    std::filesystem::path blocks;
    std::filesystem::path transactions;
    std::filesystem::path traces;
    std::filesystem::path ticks;
    std::filesystem::path config;
    Timestamp start = 0;
    Timestamp end = 0;
    Timestamp boundary = 0;
    std::uint64_t transaction_count = 0;
    std::uint64_t contract_count = 0;
};

inline constexpr Timestamp fixture_start = 1488326400;

// Synthetic chain and market data under `dir`: blocks.jsonl,
// transactions.jsonl, traces.jsonl, ticks.csv and a pipeline config.json.
// Blocks arrive every 200..520 s with Poisson transaction counts among
// n_accounts; miners earn 5 ETH per block and seed the economy. About one
// account in ten deploys a contract; calls into contracts may carry ERC20
// selectors and are forwarded by call traces. Prices follow a multiplicative
// random walk. Senders never overspend, so replay needs no clamping.
// Identical seeds give identical files. n_blocks == 0 is a ValidationError.
FixtureInfo generate_fixture(std::uint64_t seed, std::uint64_t n_blocks, std::uint64_t n_accounts,
                             const std::filesystem::path& dir);

// n hourly ticks from `start`: high follows high[i+1] = high[i] + N(0, 1)
// from start_price; open, close and low sit below it.
std::vector<MarketTick> random_walk_ticks(std::uint64_t seed, std::size_t n, double start_price = 300.0,
                                          Timestamp start = fixture_start);

} // namespace chainsight::pipeline
