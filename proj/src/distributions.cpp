#include "chainsight/distributions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "chainsight/errors.hpp"

namespace chainsight::distributions {

namespace {

constexpr u128 pow10(int e) {
    u128 v = 1;
    for (int i = 0; i < e; ++i) v *= 10;
    return v;
}

int bit_width_u128(u128 q) {
    auto hi = static_cast<std::uint64_t>(q >> 64);
    if (hi != 0) return 64 + std::bit_width(hi);
    return std::bit_width(static_cast<std::uint64_t>(q));
}

} // namespace

int floor_log(u128 q, double base) {
    if (q == 0) throw ValidationError("floor_log of 0");
    if (!(base > 1.0)) throw ValidationError("log base must exceed 1");
    if (base == 2.0) return bit_width_u128(q) - 1;
    const long double x = static_cast<long double>(q);
    const long double b = base;
    int k = static_cast<int>(std::floor(std::log(x) / std::log(b)));
    if (k < 0) k = 0;
    while (std::pow(b, static_cast<long double>(k + 1)) <= x) ++k;
    while (k > 0 && std::pow(b, static_cast<long double>(k)) > x) --k;
    return k;
}

std::optional<int> ScaleFn::floor_scale(u128 x) const {
    u128 q = x / (pre_divisor == 0 ? 1 : pre_divisor);
    if (q == 0) return std::nullopt;
    return floor_log(q, base);
}

double ScaleFn::rescale(long double y) const {
    if (!(y >= 1.0L)) return 0.0;
    return static_cast<double>(std::log(y) / std::log(static_cast<long double>(base)));
}

std::size_t group_count(const ScaleFn& scl, u128 mx) {
    if (mx == 0) throw ValidationError("distribution max constant must be positive");
    int n = floor_log(mx, scl.base);
    if (n < 1) throw ValidationError("distribution needs at least one group");
    return static_cast<std::size_t>(n);
}

std::size_t group_index(u128 value, const ScaleFn& scl, std::size_t group_n) {
    auto g = scl.floor_scale(value);
    if (!g || *g < 0) return 0;
    return std::min(static_cast<std::size_t>(*g), group_n - 1);
}

Feature parse_feature(std::string_view name) {
    if (name == "balance") return Feature::balance;
    if (name == "lastSeen") return Feature::last_seen;
    if (name == "volumeIn") return Feature::volume_in;
    if (name == "volumeOut") return Feature::volume_out;
    if (name == "transactionN") return Feature::transaction_n;
    if (name == "ERC20") return Feature::erc20;
    throw UnknownFeature(std::string(name));
}

std::string_view feature_name(Feature f) {
    switch (f) {
    case Feature::balance: return "balance";
    case Feature::last_seen: return "lastSeen";
    case Feature::volume_in: return "volumeIn";
    case Feature::volume_out: return "volumeOut";
    case Feature::transaction_n: return "transactionN";
    case Feature::erc20: return "ERC20";
    }
    return "?";
}

u128 feature_value(const ledger::AccountState& acc, Feature f, Timestamp tick_time) {
    switch (f) {
    case Feature::balance: return acc.balance.value;
    case Feature::last_seen: return tick_time > acc.last_seen ? static_cast<u128>(tick_time - acc.last_seen) : 0;
    case Feature::volume_in: return acc.volume_in.value;
    case Feature::volume_out: return acc.volume_out.value;
    case Feature::transaction_n: return acc.transaction_n;
    case Feature::erc20: return acc.erc20_n;
    }
    return 0;
}

DistributionConfig make_config(std::string name, Subset subset, std::string_view feat1, std::string_view feat2,
                               ScaleFn scl1, ScaleFn scl2, u128 mx1, u128 mx2) {
    return DistributionConfig{std::move(name), subset, parse_feature(feat1), parse_feature(feat2), scl1, scl2, mx1, mx2};
}

std::vector<DistributionConfig> builtin_configs() {
    const u128 tenth_eth = pow10(17);
    const ScaleFn log12_wei{1.2, tenth_eth};
    const ScaleFn log12{1.2, 1};
    const ScaleFn log2_wei{2.0, tenth_eth};
    const ScaleFn log2{2.0, 1};
    return {
        {"balanceLastSeenDistribution", Subset::all, Feature::balance, Feature::last_seen, log12_wei, log12, pow10(7), 20'736'000},
        {"contractBalanceLastSeenDistribution", Subset::contracts, Feature::balance, Feature::last_seen, log12_wei, log12,
         pow10(7), 20'736'000},
        {"contractVolumeInERC20Distribution", Subset::contracts, Feature::volume_in, Feature::erc20, log2_wei, log2, pow10(7),
         262'144},
    };
}

std::vector<Amount> account_balance_sums(const ledger::LedgerSnapshot& snapshot, const BalanceDistributionConfig& cfg) {
    const std::size_t groups = group_count(cfg.scl0, cfg.mx0);
    std::vector<Amount> sums(balance_feature_rows * groups);
    for (const auto& [_, acc] : snapshot.account_map()) {
        if (acc.transaction_n == 0) continue;
        std::size_t gr = group_index(acc.balance.value, cfg.scl0, groups);
        sums[0 * groups + gr] = add_sat(sums[0 * groups + gr], acc.volume_in);
        sums[1 * groups + gr] = add_sat(sums[1 * groups + gr], acc.volume_out);
        sums[2 * groups + gr] = add_sat(sums[2 * groups + gr], Amount::from_u64(acc.transaction_n));
    }
    return sums;
}

DistributionMatrix account_balance_distribution(const ledger::LedgerSnapshot& snapshot,
                                                const BalanceDistributionConfig& cfg) {
    auto sums = account_balance_sums(snapshot, cfg);
    DistributionMatrix m;
    m.tick_time = snapshot.tick_time;
    m.kind = DistributionKind::balance_activity;
    m.rows = balance_feature_rows;
    m.cols = sums.size() / balance_feature_rows;
    m.values.reserve(sums.size());
    for (const auto& s : sums) m.values.push_back(cfg.scl0.rescale(s.to_long_double()));
    return m;
}

std::vector<std::uint64_t> account_number_counts(const ledger::LedgerSnapshot& snapshot, const DistributionConfig& config) {
    const std::size_t g1 = config.groups1();
    const std::size_t g2 = config.groups2();
    std::vector<std::uint64_t> counts(g1 * g2, 0);
    for (const auto& [_, acc] : snapshot.account_map()) {
        if (config.subset == Subset::contracts && !acc.is_contract) continue;
        std::size_t a = group_index(feature_value(acc, config.feat1, snapshot.tick_time), config.scl1, g1);
        std::size_t b = group_index(feature_value(acc, config.feat2, snapshot.tick_time), config.scl2, g2);
        ++counts[a * g2 + b];
    }
    return counts;
}

DistributionMatrix account_number_distribution(const ledger::LedgerSnapshot& snapshot, const DistributionConfig& config) {
    auto counts = account_number_counts(snapshot, config);
    DistributionMatrix m;
    m.tick_time = snapshot.tick_time;
    m.kind = DistributionKind::account_number;
    m.rows = config.groups1();
    m.cols = config.groups2();
    m.values.reserve(counts.size());
    for (auto c : counts) m.values.push_back(c >= 1 ? std::log2(static_cast<double>(c)) : 0.0);
    return m;
}

properties::PropertySeries to_property_series(const std::string& name, std::span<const DistributionMatrix> frames,
                                              std::span<const Timestamp> times) {
    if (frames.size() != times.size()) throw ValidationError("one timestamp per distribution frame required");
    properties::PropertySeries s;
    s.name = name;
    s.unit = "log-scaled";
    if (!frames.empty()) s.shape = {frames[0].rows, frames[0].cols};
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].rows != s.shape.rows || frames[i].cols != s.shape.cols)
            throw ValidationError("distribution frames of " + name + " differ in shape");
        s.push(times[i], frames[i].values);
    }
    return s;
}

std::vector<std::uint8_t> frame_pixels(const DistributionMatrix& m) {
    std::vector<std::uint8_t> px(m.values.size(), 0);
    if (m.values.empty()) return px;
    auto [lo, hi] = std::minmax_element(m.values.begin(), m.values.end());
    const double min = *lo;
    const double range = *hi - *lo;
    if (!(range > 0)) return px;
    for (std::size_t i = 0; i < m.values.size(); ++i)
        px[i] = static_cast<std::uint8_t>(std::lround((m.values[i] - min) / range * 255.0));
    return px;
}

std::vector<std::filesystem::path> export_frames(std::span<const DistributionMatrix> frames,
                                                 const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    if (frames.empty()) return written;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& m = frames[i];
        if (m.rows != frames[0].rows || m.cols != frames[0].cols) throw ValidationError("frames differ in shape");
        auto path = dir / fmt::format("frame_{:06}.pgm", i);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        // PGM rows are image rows: one per distribution row.
        out << "P5\n" << m.cols << ' ' << m.rows << "\n255\n";
        auto px = frame_pixels(m);
        out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
        if (!out) throw IoError("write failed: " + path.string());
        written.push_back(path);
    }
    return written;
}

} // namespace chainsight::distributions
