#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chainsight/normalize.hpp"
#include "chainsight/properties.hpp"

namespace chainsight::datasetgen {

using properties::PropertySeries;
using properties::Shape;

enum class Model { matrix, stacked };

std::string_view to_string(Model m);
Model parse_model(std::string_view s);

// One property's slice of a window: wn consecutive per-tick tensors, tick-major.
struct WindowColumn {
    std::string_view name;
    Shape shape;
    std::span<const double> values;
};

struct Window {
    std::vector<WindowColumn> columns;
    double target = 0;
    Timestamp time = 0; // target timestamp
};

// Sliding windows with step 1: window `step` covers ticks [step, step + wn)
// of every property and targets tick wn + step. All series must share their
// time axis and be longer than wn (TooShort otherwise). The returned windows
// view into `props`.
std::vector<Window> make_windows(std::span<const PropertySeries> props, const PropertySeries& target, std::size_t wn);

// propN x wn, one row per property in order. NonScalarProperty for tensors.
std::vector<double> model_matrix(const Window& w, std::size_t wn);

// V1 x V2 x wn, V1 = sum of rows, V2 = max cols, depth innermost. Property k
// sits at row offset sum_{j<k} rows_j, column 0; uncovered cells are 0.
std::vector<double> model_stacked(const Window& w, std::size_t wn);
std::vector<std::size_t> stacked_shape(std::span<const Shape> shapes, std::size_t wn);

struct PropertyMeta {
    std::string name;
    Shape shape;
    NormalizationParams params;

    bool operator==(const PropertyMeta&) const = default;
};

struct Dataset {
    Model model = Model::matrix;
    std::vector<std::size_t> input_shape;
    std::size_t wn = 0;
    std::vector<PropertyMeta> properties;
    std::string target_name;
    NormalizationParams target_params;
    std::vector<Timestamp> times;  // target timestamp per sample
    std::vector<double> inputs;    // sample-major, row-major within a sample
    std::vector<double> targets;   // normalized

    std::size_t size() const { return times.size(); }
    bool empty() const { return times.empty(); }
    std::size_t sample_size() const;
    std::span<const double> sample(std::size_t i) const {
        return std::span<const double>(inputs).subspan(i * sample_size(), sample_size());
    }
    // Samples [begin, end) with identical metadata.
    Dataset slice(std::size_t begin, std::size_t end) const;

    // Flat offset in a sample of property `k`, entry (r, c), window tick d.
    std::size_t offset_of(std::size_t k, std::size_t r, std::size_t c, std::size_t d) const;
    std::optional<std::size_t> property_index(std::string_view name) const;
};

// Samples with target time < boundary go to train, the rest to test.
// EmptySplit if either side would be empty.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, Timestamp boundary);

// 2017-03-01, 2017-11-01 and the 2017-10-01 split point, UTC.
inline constexpr Timestamp default_range_start = 1488326400;
inline constexpr Timestamp default_range_end = 1509494400;
inline constexpr Timestamp default_split_boundary = 1506816000;

// Looks up a property series by name; throws MissingProperty.
using PropertyProvider = std::function<PropertySeries(const std::string&)>;

PropertyProvider map_provider(const std::map<std::string, PropertySeries>& series);

// provider(name), deriving "<x>_rel" from "<x>" when only the latter exists.
PropertySeries resolve_property(const std::string& name, const PropertyProvider& provider);

struct DatasetSpec {
    std::vector<std::string> properties;
    std::string target;
    std::size_t wn = 8;
    NormChoice norm = NormChoice::prop;
    Model model = Model::matrix;
    // Fit normalization on samples before the boundary only.
    std::optional<Timestamp> fit_before;
};

struct Preset {
    int set_n = 0;
    std::vector<std::string> properties;
    Model model = Model::matrix; // as tabulated; tensors still go through stacked
};

// Dataset definitions 1..8; anything else is a ValidationError.
Preset preset(int set_n);

Dataset build_dataset(const DatasetSpec& spec, const PropertyProvider& provider);
Dataset build_preset(int set_n, std::size_t wn, NormChoice norm, const std::string& target,
                     const PropertyProvider& provider, std::optional<Timestamp> fit_before = std::nullopt);

// Trims every series to the time range common to all; throws CoverageGap when
// the series disagree on the ticks inside that range.
std::vector<PropertySeries> align_series(std::vector<PropertySeries> series);

// "BPD1" | u32 LE header length | JSON header | f32 LE inputs | f32 LE targets.
// Inputs and targets pass through float32, so read-back values are the
// float-rounded ones.
std::string encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::string_view bytes);
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

} // namespace chainsight::datasetgen
