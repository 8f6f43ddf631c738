#include "chainsight/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "chainsight/bytes.hpp"
#include "chainsight/errors.hpp"

namespace chainsight::datasetgen {

using nlohmann::json;

std::string_view to_string(Model m) { return m == Model::matrix ? "matrix" : "stacked"; }

Model parse_model(std::string_view s) {
    if (s == "matrix") return Model::matrix;
    if (s == "stacked") return Model::stacked;
    throw ValidationError("unknown dataset model '" + std::string(s) + "'");
}

std::vector<Window> make_windows(std::span<const PropertySeries> props, const PropertySeries& target, std::size_t wn) {
    if (wn < 1) throw ValidationError("window length must be at least 1");
    if (!target.shape.scalar()) throw ValidationError("target " + target.name + " must be scalar");
    const std::size_t len = target.size();
    for (const auto& p : props)
        if (p.times != target.times) throw CoverageGap("property " + p.name + " is not aligned with target " + target.name);
    if (len <= wn) throw TooShort(fmt::format("series of length {} cannot fill a window of {} plus a target", len, wn));

    std::vector<Window> out;
    out.reserve(len - wn);
    for (std::size_t step = 0; step + wn < len; ++step) {
        Window w;
        w.columns.reserve(props.size());
        for (const auto& p : props)
            w.columns.push_back({p.name, p.shape, std::span<const double>(p.values).subspan(step * p.shape.size(), wn * p.shape.size())});
        w.target = target.values[wn + step];
        w.time = target.times[wn + step];
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<double> model_matrix(const Window& w, std::size_t wn) {
    std::vector<double> out;
    out.reserve(w.columns.size() * wn);
    for (const auto& col : w.columns) {
        if (!col.shape.scalar()) throw NonScalarProperty(std::string(col.name));
        out.insert(out.end(), col.values.begin(), col.values.end());
    }
    return out;
}

std::vector<std::size_t> stacked_shape(std::span<const Shape> shapes, std::size_t wn) {
    std::size_t v1 = 0, v2 = 0;
    for (const auto& s : shapes) {
        v1 += s.rows;
        v2 = std::max(v2, s.cols);
    }
    return {v1, v2, wn};
}

std::vector<double> model_stacked(const Window& w, std::size_t wn) {
    std::vector<Shape> shapes;
    for (const auto& col : w.columns) shapes.push_back(col.shape);
    auto dims = stacked_shape(shapes, wn);
    const std::size_t v2 = dims[1];
    std::vector<double> mat(dims[0] * dims[1] * wn, 0.0);
    std::size_t row0 = 0;
    for (const auto& col : w.columns) {
        const std::size_t cell = col.shape.size();
        for (std::size_t d = 0; d < wn; ++d)
            for (std::size_t r = 0; r < col.shape.rows; ++r)
                for (std::size_t c = 0; c < col.shape.cols; ++c)
                    mat[((row0 + r) * v2 + c) * wn + d] = col.values[d * cell + r * col.shape.cols + c];
        row0 += col.shape.rows;
    }
    return mat;
}

std::size_t Dataset::sample_size() const {
    std::size_t n = 1;
    for (auto d : input_shape) n *= d;
    return input_shape.empty() ? 0 : n;
}

Dataset Dataset::slice(std::size_t begin, std::size_t end) const {
    Dataset out;
    out.model = model;
    out.input_shape = input_shape;
    out.wn = wn;
    out.properties = properties;
    out.target_name = target_name;
    out.target_params = target_params;
    const std::size_t ss = sample_size();
    out.times.assign(times.begin() + static_cast<std::ptrdiff_t>(begin), times.begin() + static_cast<std::ptrdiff_t>(end));
    out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(begin), targets.begin() + static_cast<std::ptrdiff_t>(end));
    out.inputs.assign(inputs.begin() + static_cast<std::ptrdiff_t>(begin * ss), inputs.begin() + static_cast<std::ptrdiff_t>(end * ss));
    return out;
}

std::size_t Dataset::offset_of(std::size_t k, std::size_t r, std::size_t c, std::size_t d) const {
    if (model == Model::matrix) return k * wn + d;
    std::size_t row0 = 0;
    for (std::size_t j = 0; j < k; ++j) row0 += properties[j].shape.rows;
    return ((row0 + r) * input_shape[1] + c) * wn + d;
}

std::optional<std::size_t> Dataset::property_index(std::string_view name) const {
    for (std::size_t k = 0; k < properties.size(); ++k)
        if (properties[k].name == name) return k;
    return std::nullopt;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, Timestamp boundary) {
    auto cut = static_cast<std::size_t>(std::lower_bound(ds.times.begin(), ds.times.end(), boundary) - ds.times.begin());
    if (cut == 0) throw EmptySplit(fmt::format("no sample before boundary {}", boundary));
    if (cut == ds.size()) throw EmptySplit(fmt::format("no sample at or after boundary {}", boundary));
    return {ds.slice(0, cut), ds.slice(cut, ds.size())};
}

PropertyProvider map_provider(const std::map<std::string, PropertySeries>& series) {
    return [&series](const std::string& name) -> PropertySeries {
        auto it = series.find(name);
        if (it == series.end()) throw MissingProperty(name);
        return it->second;
    };
}

PropertySeries resolve_property(const std::string& name, const PropertyProvider& provider) {
    try {
        return provider(name);
    } catch (const MissingProperty&) {
        constexpr std::string_view suffix = "_rel";
        if (name.size() <= suffix.size() || !name.ends_with(suffix)) throw;
        return properties::to_relative(provider(name.substr(0, name.size() - suffix.size())));
    }
}

Preset preset(int set_n) {
    switch (set_n) {
    case 1: return {1, {"volumeFrom", "volumeTo"}, Model::matrix};
    case 2: return {2, {"volumeFrom_rel", "volumeTo_rel"}, Model::matrix};
    case 3: return {3, {"highPrice", "volumeFrom", "volumeTo"}, Model::matrix};
    case 4: return {4, {"highPrice_rel", "volumeFrom_rel", "volumeTo_rel"}, Model::matrix};
    case 5: return {5, {"accountBalanceDistribution"}, Model::matrix};
    case 6: return {6, {"balanceLastSeenDistribution"}, Model::stacked};
    case 7: return {7, {"contractBalanceLastSeenDistribution"}, Model::stacked};
    case 8:
        return {8,
                {"balanceLastSeenDistribution", "contractBalanceLastSeenDistribution", "contractVolumeInERC20Distribution",
                 "accountBalanceDistribution"},
                Model::stacked};
    default: throw ValidationError(fmt::format("dataset preset must be 1..8, got {}", set_n));
    }
}

std::vector<PropertySeries> align_series(std::vector<PropertySeries> series) {
    if (series.empty()) return series;
    Timestamp lo = std::numeric_limits<Timestamp>::min();
    Timestamp hi = std::numeric_limits<Timestamp>::max();
    for (const auto& s : series) {
        if (s.size() == 0) throw CoverageGap("property " + s.name + " is empty");
        lo = std::max(lo, s.times.front());
        hi = std::min(hi, s.times.back());
    }
    if (lo > hi) throw CoverageGap("properties share no common time range");
    for (auto& s : series) {
        auto b = std::lower_bound(s.times.begin(), s.times.end(), lo) - s.times.begin();
        auto e = std::upper_bound(s.times.begin(), s.times.end(), hi) - s.times.begin();
        const auto cell = static_cast<std::ptrdiff_t>(s.shape.size());
        s.times = std::vector<Timestamp>(s.times.begin() + b, s.times.begin() + e);
        s.values = std::vector<double>(s.values.begin() + b * cell, s.values.begin() + e * cell);
    }
    for (const auto& s : series)
        if (s.times != series.front().times)
            throw CoverageGap("properties " + s.name + " and " + series.front().name + " cover different ticks");
    return series;
}

namespace {

struct NormalizedSeries {
    PropertySeries series;
    NormalizationParams params;
};

NormalizedSeries normalize_series(const PropertySeries& s, NormChoice choice, std::optional<Timestamp> fit_before) {
    std::span<const double> fit_values(s.values);
    if (fit_before) {
        auto n = static_cast<std::size_t>(std::lower_bound(s.times.begin(), s.times.end(), *fit_before) - s.times.begin());
        if (n == 0) throw EmptySplit("no " + s.name + " values before the fit boundary");
        fit_values = fit_values.first(n * s.shape.size());
    }
    NormalizedSeries out;
    try {
        out.params = fit(fit_values, resolve(choice, fit_values));
    } catch (const DegenerateSeries& e) {
        throw DegenerateSeries(s.name + ": " + e.what());
    }
    out.series = s;
    for (auto& v : out.series.values) v = apply(out.params, v);
    return out;
}

} // namespace

Dataset build_dataset(const DatasetSpec& spec, const PropertyProvider& provider) {
    if (spec.properties.empty()) throw ValidationError("dataset needs at least one property");
    std::vector<PropertySeries> all;
    for (const auto& name : spec.properties) all.push_back(resolve_property(name, provider));
    all.push_back(resolve_property(spec.target, provider));
    all = align_series(std::move(all));

    Dataset ds;
    ds.wn = spec.wn;
    std::vector<PropertySeries> inputs;
    std::vector<Shape> shapes;
    bool all_scalar = true;
    for (std::size_t k = 0; k + 1 < all.size(); ++k) {
        auto n = normalize_series(all[k], spec.norm, spec.fit_before);
        ds.properties.push_back({n.series.name, n.series.shape, n.params});
        shapes.push_back(n.series.shape);
        all_scalar = all_scalar && n.series.shape.scalar();
        inputs.push_back(std::move(n.series));
    }
    auto target = normalize_series(all.back(), spec.norm, spec.fit_before);
    ds.target_name = target.series.name;
    ds.target_params = target.params;

    ds.model = (spec.model == Model::matrix && all_scalar) ? Model::matrix : Model::stacked;
    ds.input_shape = ds.model == Model::matrix ? std::vector<std::size_t>{inputs.size(), spec.wn} : stacked_shape(shapes, spec.wn);

    auto windows = make_windows(inputs, target.series, spec.wn);
    ds.inputs.reserve(windows.size() * ds.sample_size());
    ds.times.reserve(windows.size());
    ds.targets.reserve(windows.size());
    for (const auto& w : windows) {
        auto sample = ds.model == Model::matrix ? model_matrix(w, spec.wn) : model_stacked(w, spec.wn);
        ds.inputs.insert(ds.inputs.end(), sample.begin(), sample.end());
        ds.times.push_back(w.time);
        ds.targets.push_back(w.target);
    }
    return ds;
}

Dataset build_preset(int set_n, std::size_t wn, NormChoice norm, const std::string& target,
                     const PropertyProvider& provider, std::optional<Timestamp> fit_before) {
    auto p = preset(set_n);
    DatasetSpec spec;
    spec.properties = p.properties;
    spec.target = target;
    spec.wn = wn;
    spec.norm = norm;
    spec.model = p.model;
    spec.fit_before = fit_before;
    return build_dataset(spec, provider);
}

namespace {

constexpr std::string_view dataset_magic = "BPD1";
constexpr int dataset_version = 1;

json params_json(const NormalizationParams& p) {
    if (p.kind == NormKind::image) return {{"mean", p.mean}, {"std", p.std}};
    return {{"min", p.min}, {"max", p.max}};
}

NormalizationParams params_from(const json& j, NormKind kind) {
    NormalizationParams p;
    p.kind = kind;
    if (kind == NormKind::image) {
        p.mean = j.at("mean").get<double>();
        p.std = j.at("std").get<double>();
    } else {
        p.min = j.at("min").get<double>();
        p.max = j.at("max").get<double>();
    }
    return p;
}

} // namespace

std::string encode_dataset(const Dataset& ds) {
    json props = json::array();
    for (const auto& p : ds.properties)
        props.push_back({{"name", p.name},
                         {"shape", {p.shape.rows, p.shape.cols}},
                         {"norm_kind", to_string(p.params.kind)},
                         {"params", params_json(p.params)}});
    json header = {{"version", dataset_version},
                   {"model", to_string(ds.model)},
                   {"input_shape", ds.input_shape},
                   {"wn", ds.wn},
                   {"properties", std::move(props)},
                   {"target",
                    {{"name", ds.target_name},
                     {"norm_kind", to_string(ds.target_params.kind)},
                     {"params", params_json(ds.target_params)}}},
                   {"times", ds.times}};
    std::string h = header.dump();
    std::string out(dataset_magic);
    bytes::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(h.size()));
    out += h;
    out.reserve(out.size() + 4 * (ds.inputs.size() + ds.targets.size()));
    for (double v : ds.inputs) bytes::append_le<float>(out, static_cast<float>(v));
    for (double v : ds.targets) bytes::append_le<float>(out, static_cast<float>(v));
    return out;
}

Dataset decode_dataset(std::string_view data) {
    if (data.size() < dataset_magic.size() || data.substr(0, dataset_magic.size()) != dataset_magic)
        throw BadMagic("not a dataset file (bad magic)");
    bytes::Reader r(data.substr(dataset_magic.size()));
    auto header_len = r.read_le<std::uint32_t>();
    json h = json::parse(r.take(header_len), nullptr, false);
    if (h.is_discarded() || !h.is_object()) throw ValidationError("dataset header is not a JSON object");
    if (h.value("version", -1) != dataset_version)
        throw VersionMismatch(fmt::format("dataset version {} is not supported", h.value("version", -1)));

    Dataset ds;
    try {
        ds.model = parse_model(h.at("model").get<std::string>());
        ds.input_shape = h.at("input_shape").get<std::vector<std::size_t>>();
        ds.wn = h.at("wn").get<std::size_t>();
        for (const auto& p : h.at("properties")) {
            auto shape = p.at("shape").get<std::vector<std::size_t>>();
            if (shape.size() != 2) throw ValidationError("property shape must have two dimensions");
            ds.properties.push_back({p.at("name").get<std::string>(), {shape[0], shape[1]},
                                     params_from(p.at("params"), parse_norm_kind(p.at("norm_kind").get<std::string>()))});
        }
        const auto& t = h.at("target");
        ds.target_name = t.at("name").get<std::string>();
        ds.target_params = params_from(t.at("params"), parse_norm_kind(t.at("norm_kind").get<std::string>()));
        ds.times = h.at("times").get<std::vector<Timestamp>>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("dataset header: ") + e.what());
    }

    const std::size_t n = ds.times.size();
    const std::size_t ss = ds.sample_size();
    ds.inputs.reserve(n * ss);
    for (std::size_t i = 0; i < n * ss; ++i) ds.inputs.push_back(r.read_le<float>());
    ds.targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) ds.targets.push_back(r.read_le<float>());
    if (!r.done()) throw ValidationError(fmt::format("dataset has {} trailing bytes", r.remaining()));
    return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
    auto bytes = encode_dataset(ds);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return decode_dataset(ss.str());
}

} // namespace chainsight::datasetgen
