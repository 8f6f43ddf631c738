#include "chainsight/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "chainsight/errors.hpp"
#include "chainsight/ingest.hpp"

namespace chainsight::pipeline {

namespace {

constexpr u128 wei_per_eth = 1'000'000'000'000'000'000ULL;

std::string random_address(std::mt19937_64& rng) {
    std::uint64_t a = rng(), b = rng(), c = rng();
    return fmt::format("0x{:016x}{:016x}{:08x}", a, b, static_cast<std::uint32_t>(c));
}

struct Account {
    std::string address;
    u128 balance = 0;
    bool contract = false;
};

// Uniform fraction of the balance, kept to whole gwei.
u128 spend(std::mt19937_64& rng, u128 balance, double max_fraction) {
    if (balance == 0) return 0;
    std::uniform_real_distribution<double> u(0.0, max_fraction);
    long double v = static_cast<long double>(balance) * u(rng);
    u128 out = static_cast<u128>(v);
    out -= out % 1'000'000'000ULL;
    return std::min(out, balance);
}

} // namespace

FixtureInfo generate_fixture(std::uint64_t seed, std::uint64_t n_blocks, std::uint64_t n_accounts,
                             const std::filesystem::path& dir) {
    if (n_blocks == 0) throw ValidationError("generate_fixture: n_blocks must be at least 1");
    if (n_accounts < 2) throw ValidationError("generate_fixture: n_accounts must be at least 2");

    std::mt19937_64 rng(seed);
    std::vector<Account> accounts(n_accounts);
    for (auto& a : accounts) a.address = random_address(rng);
    std::vector<Account> miners(5);
    for (auto& m : miners) m.address = random_address(rng);
    std::vector<std::size_t> contracts;

    std::uniform_int_distribution<int> interval(200, 520);
    std::uniform_int_distribution<std::size_t> pick_account(0, n_accounts - 1);
    std::uniform_int_distribution<std::size_t> pick_miner(0, miners.size() - 1);
    std::poisson_distribution<int> tx_per_block(4.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<Block> blocks;
    std::vector<Transaction> txs;
    std::vector<Trace> traces;
    blocks.reserve(n_blocks);

    const u128 reward = 5 * wei_per_eth;
    Timestamp t = fixture_start + 13;
    double difficulty = 1.2e15;
    std::uint64_t contract_count = 0;

    for (std::uint64_t n = 0; n < n_blocks; ++n) {
        if (n > 0) t += interval(rng);
        Block b;
        b.number = 3'000'000 + n;
        b.timestamp = t;
        auto& miner = miners[pick_miner(rng)];
        b.miner = miner.address;
        difficulty *= std::exp(0.002 * gauss(rng));
        b.difficulty = Amount{static_cast<u128>(difficulty)};
        b.gas_limit = 6'700'000;

        std::vector<Transaction> block_txs;
        std::vector<Trace> block_traces;
        std::uint64_t gas = 0;

        // Miners hand out part of their earnings so accounts can transact.
        for (auto& m : miners) {
            if (m.balance < wei_per_eth || unit(rng) > 0.3) continue;
            auto& to = accounts[pick_account(rng)];
            Transaction tx;
            tx.block_number = b.number;
            tx.from = m.address;
            tx.to = to.address;
            tx.value_wei = Amount{spend(rng, m.balance, 0.5)};
            tx.gas_used = 21'000;
            tx.gas_price_wei = Amount{static_cast<u128>(20'000'000'000ULL + (rng() % 5'000'000'000ULL))};
            m.balance -= tx.value_wei.value;
            to.balance += tx.value_wei.value;
            block_txs.push_back(std::move(tx));
        }

        int k = tx_per_block(rng);
        for (int i = 0; i < k; ++i) {
            auto& from = accounts[pick_account(rng)];
            if (from.contract || from.balance == 0) continue;
            Transaction tx;
            tx.block_number = b.number;
            tx.from = from.address;
            tx.gas_price_wei = Amount{static_cast<u128>(18'000'000'000ULL + (rng() % 8'000'000'000ULL))};
            double r = unit(rng);
            if (r < 0.06 && contracts.size() < n_accounts / 10 + 1) {
                // Deployment: the creation trace carries the endowment.
                Account c;
                c.address = random_address(rng);
                c.contract = true;
                u128 endowment = spend(rng, from.balance, 0.2);
                tx.gas_used = 120'000;
                tx.input_selector = std::nullopt;
                block_txs.push_back(tx);
                block_traces.push_back({b.number, from.address, c.address, Amount{endowment}, TraceKind::create});
                from.balance -= endowment;
                c.balance = endowment;
                accounts.push_back(std::move(c));
                contracts.push_back(accounts.size() - 1);
                ++contract_count;
            } else if (r < 0.45 && !contracts.empty()) {
                auto& c = accounts[contracts[rng() % contracts.size()]];
                u128 v = spend(rng, from.balance, 0.3);
                tx.to = c.address;
                tx.value_wei = Amount{v};
                tx.gas_used = 52'000;
                double sel = unit(rng);
                if (sel < 0.5) tx.input_selector = "a9059cbb";
                else if (sel < 0.65) tx.input_selector = "23b872dd";
                else tx.input_selector = "d0e30db0";
                from.balance -= v;
                c.balance += v;
                block_txs.push_back(tx);
                if (unit(rng) < 0.5) {
                    auto& dest = accounts[pick_account(rng)];
                    u128 fwd = spend(rng, c.balance, 0.8);
                    if (&dest != &c) {
                        c.balance -= fwd;
                        dest.balance += fwd;
                        block_traces.push_back({b.number, c.address, dest.address, Amount{fwd}, TraceKind::call});
                    }
                }
            } else {
                auto& to = accounts[pick_account(rng)];
                u128 v = spend(rng, from.balance, 0.5);
                tx.to = to.address;
                tx.value_wei = Amount{v};
                tx.gas_used = 21'000;
                if (&to != &from) {
                    from.balance -= v;
                    to.balance += v;
                }
                block_txs.push_back(tx);
            }
        }
        for (const auto& tx : block_txs) gas += tx.gas_used;
        b.gas_used = gas;
        b.tx_count = static_cast<std::uint32_t>(block_txs.size());
        b.size_bytes = 540 + 110 * block_txs.size() + rng() % 64;
        miner.balance += reward;

        blocks.push_back(b);
        txs.insert(txs.end(), block_txs.begin(), block_txs.end());
        traces.insert(traces.end(), block_traces.begin(), block_traces.end());
    }

    FixtureInfo info;
    info.start = fixture_start;
    info.end = tick_floor(blocks.back().timestamp) + tick_span;
    const Timestamp n_ticks = (info.end - info.start) / tick_span;
    info.boundary = info.start + std::max<Timestamp>(1, (n_ticks * 7) / 8) * tick_span;
    info.transaction_count = txs.size();
    info.contract_count = contract_count;

    std::vector<MarketTick> ticks;
    double price = 50.0;
    for (Timestamp tt = info.start; tt < info.end; tt += tick_span) {
        MarketTick m;
        m.time = tt;
        m.open = price;
        price *= std::exp(0.01 * gauss(rng));
        m.close = price;
        m.high = std::max(m.open, m.close) * (1.0 + 0.004 * std::abs(gauss(rng)));
        m.low = std::min(m.open, m.close) * (1.0 - 0.004 * std::abs(gauss(rng)));
        m.volume_from = std::round(2000.0 * std::exp(0.5 * gauss(rng)) * 100.0) / 100.0;
        m.volume_to = std::round(m.volume_from * (m.open + m.close) / 2.0 * 100.0) / 100.0;
        ticks.push_back(m);
    }

    std::filesystem::create_directories(dir);
    info.blocks = dir / "blocks.jsonl";
    info.transactions = dir / "transactions.jsonl";
    info.traces = dir / "traces.jsonl";
    info.ticks = dir / "ticks.csv";
    info.config = dir / "config.json";
    ingest::write_blocks(info.blocks, blocks);
    ingest::write_transactions(info.transactions, txs);
    ingest::write_traces(info.traces, traces);
    ingest::write_ticks(info.ticks, ticks);

    nlohmann::ordered_json cfg = {
        {"blocks", "blocks.jsonl"},
        {"transactions", "transactions.jsonl"},
        {"traces", "traces.jsonl"},
        {"ticks", "ticks.csv"},
        {"store", "store"},
        {"start", info.start},
        {"end", info.end},
        {"boundary", info.boundary},
        {"preset", 8},
        {"wn", 8},
        {"norm", "image"},
        {"target", "highPrice_rel"},
        {"model", "linear"},
        {"seed", seed},
        {"train", {{"batch_size", 16}, {"learning_rate", 1e-5}, {"epochs", 10}}},
        {"ledger", {{"miner_reward_wei", Amount{reward}.to_decimal()}, {"debit_gas_fees", false}}},
    };
    std::ofstream out(info.config, std::ios::trunc);
    if (!out) throw IoError("cannot write " + info.config.string());
    out << cfg.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + info.config.string());
    return info;
}

std::vector<MarketTick> random_walk_ticks(std::uint64_t seed, std::size_t n, double start_price, Timestamp start) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> step(0.0, 1.0);
    std::normal_distribution<double> spread(0.0, 0.5);
    std::uniform_real_distribution<double> vol(500.0, 5000.0);
    std::vector<MarketTick> out;
    out.reserve(n);
    double high = start_price;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) high += step(rng);
        MarketTick m;
        m.time = start + static_cast<Timestamp>(i) * tick_span;
        m.high = high;
        m.open = high - std::abs(spread(rng));
        m.close = high - std::abs(spread(rng));
        m.low = std::min(m.open, m.close) - std::abs(spread(rng));
        m.volume_from = vol(rng);
        m.volume_to = m.volume_from * (m.open + m.close) / 2;
        out.push_back(m);
    }
    return out;
}

} // namespace chainsight::pipeline
