#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace chainsight {

using u128 = unsigned __int128;

inline constexpr u128 u128_max = ~u128{0};

// Unsigned 128-bit quantity carried through the pipeline for u256 chain values
// (wei amounts, difficulty). Values that do not fit are pinned at u128_max and
// flagged rather than wrapped.
struct Amount {
    u128 value = 0;
    bool saturated = false;

    constexpr Amount() = default;
    constexpr Amount(u128 v, bool sat = false) : value(v), saturated(sat) {}

    static Amount from_u64(std::uint64_t v) { return Amount{v}; }

    // Accepts a non-negative decimal string, or a 0x-prefixed hex string.
    // Returns false on syntax errors (empty, sign, stray characters).
    static bool parse(std::string_view text, Amount& out);

    std::string to_decimal() const;
    std::string to_hex() const;
    long double to_long_double() const { return static_cast<long double>(value); }
    double to_double() const { return static_cast<double>(value); }

    friend constexpr bool operator==(const Amount& a, const Amount& b) = default;
    friend constexpr auto operator<=>(const Amount& a, const Amount& b) { return a.value <=> b.value; }
};

// Saturating add; the flag is sticky.
constexpr Amount add_sat(Amount a, Amount b) {
    u128 r = a.value + b.value;
    if (r < a.value) return Amount{u128_max, true};
    return Amount{r, a.saturated || b.saturated};
}

constexpr Amount mul_sat(Amount a, Amount b) {
    if (a.value == 0 || b.value == 0) return Amount{0, a.saturated || b.saturated};
    if (a.value > u128_max / b.value) return Amount{u128_max, true};
    return Amount{a.value * b.value, a.saturated || b.saturated};
}

std::string u128_to_decimal(u128 v);

} // namespace chainsight
