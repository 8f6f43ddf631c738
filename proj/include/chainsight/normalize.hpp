#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chainsight::datasetgen {

enum class NormKind { basic, around_zero, image };

// `prop` picks basic or around_zero per series.
enum class NormChoice { basic, around_zero, image, prop };

struct NormalizationParams {
    NormKind kind = NormKind::basic;
    double min = 0; // basic, around_zero
    double max = 0;
    double mean = 0; // image
    double std = 1;

    bool operator==(const NormalizationParams&) const = default;
};

struct Normalized {
    std::vector<double> values;
    NormalizationParams params;
};

// Fits parameters over every entry of `values`. Throws DegenerateSeries when
// the scale would divide by zero (constant input; all-zero for around_zero).
NormalizationParams fit(std::span<const double> values, NormKind kind);

double apply(const NormalizationParams& p, double x);
double invert(const NormalizationParams& p, double y);

Normalized normalize(std::span<const double> values, NormKind kind);
std::vector<double> inverse_normalize(std::span<const double> values, const NormalizationParams& params);

// basic when the series never changes sign (min >= 0 or max <= 0), else around_zero.
NormKind resolve_prop(std::span<const double> values);
NormKind resolve(NormChoice choice, std::span<const double> values);

std::string_view to_string(NormKind k);
std::string_view to_string(NormChoice c);
NormKind parse_norm_kind(std::string_view s);
NormChoice parse_norm_choice(std::string_view s);

} // namespace chainsight::datasetgen
