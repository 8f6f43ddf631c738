#include "chainsight/normalize.hpp"

#include <algorithm>
#include <cmath>

#include "chainsight/errors.hpp"

namespace chainsight::datasetgen {

NormalizationParams fit(std::span<const double> values, NormKind kind) {
    if (values.empty()) throw DegenerateSeries("cannot normalize an empty series");
    NormalizationParams p;
    p.kind = kind;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    switch (kind) {
    case NormKind::basic:
        p.min = *lo;
        p.max = *hi;
        if (!(p.max > p.min)) throw DegenerateSeries("basic normalization of a constant series");
        break;
    case NormKind::around_zero: {
        p.min = *lo;
        p.max = *hi;
        double m = std::max(std::abs(p.max), std::abs(p.min));
        if (!(m > 0)) throw DegenerateSeries("around_zero normalization of an all-zero series");
        break;
    }
    case NormKind::image: {
        double sum = 0;
        for (double v : values) sum += v;
        p.mean = sum / static_cast<double>(values.size());
        double ss = 0;
        for (double v : values) ss += (v - p.mean) * (v - p.mean);
        p.std = std::sqrt(ss / static_cast<double>(values.size()));
        if (!(p.std > 0)) throw DegenerateSeries("image normalization of a constant series");
        break;
    }
    }
    return p;
}

double apply(const NormalizationParams& p, double x) {
    switch (p.kind) {
    case NormKind::basic: return (x - p.min) / (p.max - p.min);
    case NormKind::around_zero: {
        double m = std::max(std::abs(p.max), std::abs(p.min));
        return (x + m) / (2 * m);
    }
    case NormKind::image: return (x - p.mean) * (1.0 / p.std);
    }
    return x;
}

double invert(const NormalizationParams& p, double y) {
    switch (p.kind) {
    case NormKind::basic: return y * (p.max - p.min) + p.min;
    case NormKind::around_zero: {
        double m = std::max(std::abs(p.max), std::abs(p.min));
        return y * (2 * m) - m;
    }
    case NormKind::image: return y * p.std + p.mean;
    }
    return y;
}

Normalized normalize(std::span<const double> values, NormKind kind) {
    Normalized out;
    out.params = fit(values, kind);
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(apply(out.params, v));
    return out;
}

std::vector<double> inverse_normalize(std::span<const double> values, const NormalizationParams& params) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values) out.push_back(invert(params, v));
    return out;
}

NormKind resolve_prop(std::span<const double> values) {
    if (values.empty()) return NormKind::basic;
    auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return (*lo >= 0 || *hi <= 0) ? NormKind::basic : NormKind::around_zero;
}

NormKind resolve(NormChoice choice, std::span<const double> values) {
    switch (choice) {
    case NormChoice::basic: return NormKind::basic;
    case NormChoice::around_zero: return NormKind::around_zero;
    case NormChoice::image: return NormKind::image;
    case NormChoice::prop: return resolve_prop(values);
    }
    return NormKind::basic;
}

std::string_view to_string(NormKind k) {
    switch (k) {
    case NormKind::basic: return "basic";
    case NormKind::around_zero: return "around_zero";
    case NormKind::image: return "image";
    }
    return "?";
}

std::string_view to_string(NormChoice c) {
    if (c == NormChoice::prop) return "prop";
    return to_string(static_cast<NormKind>(c));
}

NormKind parse_norm_kind(std::string_view s) {
    if (s == "basic") return NormKind::basic;
    if (s == "around_zero") return NormKind::around_zero;
    if (s == "image") return NormKind::image;
    throw ValidationError("unknown normalization '" + std::string(s) + "'");
}

NormChoice parse_norm_choice(std::string_view s) {
    if (s == "prop") return NormChoice::prop;
    return static_cast<NormChoice>(parse_norm_kind(s));
}

} // namespace chainsight::datasetgen
