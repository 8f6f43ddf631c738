#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "chainsight/amount.hpp"
#include "chainsight/distributions.hpp"
#include "chainsight/ledger.hpp"
#include "test_support.hpp"

namespace oracle {

using chainsight::u128;

// Largest k with base^k <= q, by repeated multiplication.
inline int floor_log_by_powers(u128 q, long double base) {
    const long double x = static_cast<long double>(q);
    long double p = 1;
    int k = 0;
    while (p * base <= x) {
        p *= base;
        ++k;
    }
    return k;
}

// base^0 .. base^(group_n - 1), each by repeated multiplication.
inline std::vector<long double> power_table(long double base, std::size_t group_n) {
    std::vector<long double> p{1};
    while (p.size() < group_n) p.push_back(p.back() * base);
    return p;
}

// Linear scan for the last group whose lower power does not exceed the scaled value.
inline std::size_t naive_group(u128 value, const std::vector<long double>& powers, u128 pre_divisor) {
    u128 q = value / pre_divisor;
    if (q == 0) return 0;
    std::size_t g = 0;
    for (std::size_t k = 1; k < powers.size(); ++k)
        if (powers[k] <= static_cast<long double>(q)) g = k;
    return g;
}

inline u128 random_u128(std::mt19937_64& rng, int max_bits) {
    std::uniform_int_distribution<int> bits(0, max_bits);
    int b = bits(rng);
    if (b == 0) return 0;
    u128 v = (static_cast<u128>(rng()) << 64) | rng();
    return b >= 128 ? v : v & ((u128{1} << b) - 1);
}

// Snapshot of up to `max_accounts` accounts with features spread over many
// orders of magnitude.
inline chainsight::ledger::LedgerSnapshot random_snapshot(std::mt19937_64& rng, int max_accounts,
                                                          chainsight::Timestamp tick_time = 1'500'000'000) {
    std::uniform_int_distribution<int> count(0, max_accounts);
    std::uniform_int_distribution<std::int64_t> age(0, 40'000'000);
    std::uniform_int_distribution<std::uint64_t> small(0, 1u << 20);
    std::bernoulli_distribution coin(0.4);
    auto map = std::make_shared<chainsight::ledger::AccountMap>();
    int n = count(rng);
    for (int i = 0; i < n; ++i) {
        chainsight::ledger::AccountState a;
        a.balance = chainsight::Amount{random_u128(rng, 90)};
        a.last_seen = tick_time - age(rng);
        a.volume_in = chainsight::Amount{random_u128(rng, 90)};
        a.volume_out = chainsight::Amount{random_u128(rng, 90)};
        a.transaction_n = coin(rng) ? 0 : small(rng) % 50;
        a.erc20_n = small(rng) >> static_cast<int>(small(rng) % 21);
        a.is_contract = coin(rng);
        (*map)[testing::address(i)] = a;
    }
    chainsight::ledger::LedgerSnapshot s;
    s.tick_time = tick_time;
    s.accounts = map;
    s.unique_accounts = static_cast<std::uint64_t>(n);
    return s;
}

inline u128 feature(const chainsight::ledger::AccountState& a, chainsight::distributions::Feature f,
                    chainsight::Timestamp tick_time) {
    using chainsight::distributions::Feature;
    switch (f) {
    case Feature::balance: return a.balance.value;
    case Feature::last_seen: return tick_time > a.last_seen ? static_cast<u128>(tick_time - a.last_seen) : 0;
    case Feature::volume_in: return a.volume_in.value;
    case Feature::volume_out: return a.volume_out.value;
    case Feature::transaction_n: return a.transaction_n;
    case Feature::erc20: return a.erc20_n;
    }
    return 0;
}

// Re-bins every account by scanning all groups of both axes.
inline std::vector<std::uint64_t> naive_counts(const chainsight::ledger::LedgerSnapshot& s,
                                               const chainsight::distributions::DistributionConfig& c) {
    const auto g1 = static_cast<std::size_t>(floor_log_by_powers(c.mx1, c.scl1.base));
    const auto g2 = static_cast<std::size_t>(floor_log_by_powers(c.mx2, c.scl2.base));
    const auto p1 = power_table(c.scl1.base, g1);
    const auto p2 = power_table(c.scl2.base, g2);
    std::vector<std::uint64_t> out(g1 * g2, 0);
    for (const auto& [_, acc] : s.account_map()) {
        if (c.subset == chainsight::distributions::Subset::contracts && !acc.is_contract) continue;
        std::size_t a = naive_group(feature(acc, c.feat1, s.tick_time), p1, c.scl1.pre_divisor);
        std::size_t b = naive_group(feature(acc, c.feat2, s.tick_time), p2, c.scl2.pre_divisor);
        ++out[a * g2 + b];
    }
    return out;
}

} // namespace oracle
