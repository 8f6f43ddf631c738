#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chainsight/amount.hpp"
#include "chainsight/ledger.hpp"
#include "chainsight/properties.hpp"

namespace chainsight::distributions {

// floor(log_base(q)) for q >= 1, exact for base 2 and corrected against
// repeated powers otherwise.
int floor_log(u128 q, double base);

// x -> log_base(floor(x / pre_divisor)).
struct ScaleFn {
    double base = 2.0;
    u128 pre_divisor = 1;

    // floor of the scaled value, or nullopt where the log is undefined
    // (floor(x / pre_divisor) == 0).
    std::optional<int> floor_scale(u128 x) const;

    // Real-valued log_base(y) with log of sub-1 values defined as 0. Used for
    // the final entry-wise rescale, which never applies the divisor.
    double rescale(long double y) const;
};

// floor(log_base(mx)); the divisor is not applied to the max constant.
std::size_t group_count(const ScaleFn& scl, u128 mx);

// clamp(floor(scl(value)), 0, group_n - 1); undefined logs land in group 0.
std::size_t group_index(u128 value, const ScaleFn& scl, std::size_t group_n);

enum class Feature { balance, last_seen, volume_in, volume_out, transaction_n, erc20 };

Feature parse_feature(std::string_view name); // throws UnknownFeature
std::string_view feature_name(Feature f);

// lastSeen is evaluated as tick_time - last_seen seconds.
u128 feature_value(const ledger::AccountState& acc, Feature f, Timestamp tick_time);

enum class Subset { all, contracts };

struct DistributionConfig {
    std::string name;
    Subset subset = Subset::all;
    Feature feat1 = Feature::balance;
    Feature feat2 = Feature::last_seen;
    ScaleFn scl1;
    ScaleFn scl2;
    u128 mx1 = 1;
    u128 mx2 = 1;

    std::size_t groups1() const { return group_count(scl1, mx1); }
    std::size_t groups2() const { return group_count(scl2, mx2); }
};

// balanceLastSeenDistribution, contractBalanceLastSeenDistribution,
// contractVolumeInERC20Distribution.
std::vector<DistributionConfig> builtin_configs();

// Builds a config from selector names; throws UnknownFeature.
DistributionConfig make_config(std::string name, Subset subset, std::string_view feat1, std::string_view feat2,
                               ScaleFn scl1, ScaleFn scl2, u128 mx1, u128 mx2);

enum class DistributionKind { balance_activity, account_number };

struct DistributionMatrix {
    Timestamp tick_time = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major
    DistributionKind kind = DistributionKind::account_number;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

inline constexpr std::string_view balance_distribution_name = "accountBalanceDistribution";

struct BalanceDistributionConfig {
    ScaleFn scl0{2.0, 1};
    u128 mx0 = static_cast<u128>(10'000'000'000'000ULL) * static_cast<u128>(10'000'000'000'000ULL); // 10^26
};

inline constexpr std::size_t balance_feature_rows = 3; // volumeIn, volumeOut, transactionN

// Pre-rescale sums, row-major 3 x groupN, over accounts active in the tick.
std::vector<Amount> account_balance_sums(const ledger::LedgerSnapshot& snapshot, const BalanceDistributionConfig& cfg = {});
DistributionMatrix account_balance_distribution(const ledger::LedgerSnapshot& snapshot,
                                                const BalanceDistributionConfig& cfg = {});

// Pre-log account counts, row-major groups1 x groups2.
std::vector<std::uint64_t> account_number_counts(const ledger::LedgerSnapshot& snapshot, const DistributionConfig& config);
DistributionMatrix account_number_distribution(const ledger::LedgerSnapshot& snapshot, const DistributionConfig& config);

// Packs a per-tick matrix sequence as a tensor-valued property. Each matrix is
// stamped with `times[i]` rather than its snapshot boundary.
properties::PropertySeries to_property_series(const std::string& name, std::span<const DistributionMatrix> frames,
                                              std::span<const Timestamp> times);

// One binary 8-bit PGM (P5) per matrix, min-max scaled per frame; constant
// frames are written as all-zero. Returns the written paths.
std::vector<std::filesystem::path> export_frames(std::span<const DistributionMatrix> frames,
                                                 const std::filesystem::path& dir);

// Pixel bytes for one frame, as written by export_frames.
std::vector<std::uint8_t> frame_pixels(const DistributionMatrix& m);

} // namespace chainsight::distributions
