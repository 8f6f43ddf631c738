#include "chainsight/amount.hpp"

#include <algorithm>

namespace chainsight {

namespace {

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

bool Amount::parse(std::string_view text, Amount& out) {
    u128 base = 10;
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        base = 16;
        text.remove_prefix(2);
    }
    if (text.empty()) return false;
    Amount r;
    for (char c : text) {
        int d = base == 16 ? hex_digit(c) : (c >= '0' && c <= '9' ? c - '0' : -1);
        if (d < 0) return false;
        if (r.saturated) continue;
        if (r.value > (u128_max - static_cast<u128>(d)) / base) {
            r = Amount{u128_max, true};
            continue;
        }
        r.value = r.value * base + static_cast<u128>(d);
    }
    out = r;
    return true;
}

std::string u128_to_decimal(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

std::string Amount::to_decimal() const { return u128_to_decimal(value); }

std::string Amount::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    if (value == 0) return "0x0";
    std::string s;
    u128 v = value;
    while (v != 0) {
        s.push_back(digits[static_cast<int>(v & 0xf)]);
        v >>= 4;
    }
    s += "x0";
    std::reverse(s.begin(), s.end());
    return s;
}

} // namespace chainsight
