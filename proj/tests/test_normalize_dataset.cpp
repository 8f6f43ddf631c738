#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "chainsight/dataset.hpp"
#include "chainsight/errors.hpp"
#include "chainsight/normalize.hpp"
#include "test_support.hpp"

using namespace chainsight;
using namespace chainsight::datasetgen;

namespace {

PropertySeries scalar_series(const std::string& name, std::vector<double> values, Timestamp t0 = 0) {
    PropertySeries s;
    s.name = name;
    for (std::size_t i = 0; i < values.size(); ++i) s.push(t0 + 3600 * static_cast<Timestamp>(i), values[i]);
    return s;
}

PropertySeries tensor_series(const std::string& name, Shape shape, std::size_t n, double base) {
    PropertySeries s;
    s.name = name;
    s.shape = shape;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(shape.size());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] = base + 100.0 * static_cast<double>(i) + static_cast<double>(j);
        s.push(3600 * static_cast<Timestamp>(i), v);
    }
    return s;
}

} // namespace

TEST_CASE("normalization examples") {
    std::vector<double> x{2, 4, 6};
    CHECK(normalize(x, NormKind::basic).values == std::vector<double>{0, 0.5, 1});
    std::vector<double> z{-4, 0, 1};
    CHECK(normalize(z, NormKind::around_zero).values == std::vector<double>{0, 0.5, 0.625});
    std::vector<double> y{1, 2, 3};
    auto img = normalize(y, NormKind::image);
    CHECK(img.values[0] == doctest::Approx(-1.22474).epsilon(1e-5));
    CHECK(img.values[1] == 0);
    CHECK(img.values[2] == doctest::Approx(1.22474).epsilon(1e-5));
    CHECK(img.params.mean == 2);
    CHECK(img.params.std == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("inverse examples") {
    NormalizationParams basic{NormKind::basic, 2, 6};
    CHECK(invert(basic, 0.5) == 4);
    NormalizationParams image{NormKind::image, 0, 0, 2, 0.8165};
    CHECK(invert(image, 0) == 2);
    NormalizationParams az{NormKind::around_zero, -4, 1};
    CHECK(inverse_normalize(std::vector<double>{0, 0.5, 0.625}, az) == std::vector<double>{-4, 0, 1});
}

TEST_CASE("degenerate series") {
    std::vector<double> c{3, 3, 3};
    CHECK_THROWS_AS(fit(c, NormKind::basic), DegenerateSeries);
    CHECK_THROWS_AS(fit(c, NormKind::image), DegenerateSeries);
    CHECK_NOTHROW(fit(c, NormKind::around_zero));
    std::vector<double> zeros{0, 0};
    CHECK_THROWS_AS(fit(zeros, NormKind::around_zero), DegenerateSeries);
    CHECK_THROWS_AS(fit(std::vector<double>{}, NormKind::basic), DegenerateSeries);
}

TEST_CASE("prop resolution") {
    CHECK(resolve_prop(std::vector<double>{300, 310, 290}) == NormKind::basic);
    CHECK(resolve_prop(std::vector<double>{-3, 2}) == NormKind::around_zero);
    CHECK(resolve_prop(std::vector<double>{-3, 0}) == NormKind::basic);
    std::vector<double> zeros{0, 0, 0};
    CHECK(resolve_prop(zeros) == NormKind::basic);
    CHECK_THROWS_AS(fit(zeros, resolve_prop(zeros)), DegenerateSeries);
    CHECK(resolve(NormChoice::image, std::vector<double>{-1, 1}) == NormKind::image);
    CHECK(parse_norm_choice("prop") == NormChoice::prop);
    CHECK_THROWS_AS(parse_norm_choice("zscore"), ValidationError);
}

TEST_CASE("normalization invariants on random series") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd(0, 50);
    std::uniform_int_distribution<int> len(2, 200);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> x(static_cast<std::size_t>(len(rng)));
        double shift = trial % 3 == 0 ? 500 : 0;
        for (auto& v : x) v = nd(rng) + shift;
        for (auto kind : {NormKind::basic, NormKind::around_zero, NormKind::image}) {
            auto n = normalize(x, kind);
            auto back = inverse_normalize(n.values, n.params);
            for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-9 * std::max(1.0, std::abs(x[i])));
        }
        auto b = normalize(x, NormKind::basic).values;
        CHECK(*std::min_element(b.begin(), b.end()) == 0);
        CHECK(*std::max_element(b.begin(), b.end()) == 1);
        auto a = normalize(x, NormKind::around_zero).values;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] > 0) CHECK(a[i] > 0.5);
            if (x[i] < 0) CHECK(a[i] < 0.5);
            CHECK(a[i] >= 0);
            CHECK(a[i] <= 1);
        }
        auto im = normalize(x, NormKind::image).values;
        double mean = 0, ss = 0;
        for (double v : im) mean += v;
        mean /= static_cast<double>(im.size());
        for (double v : im) ss += (v - mean) * (v - mean);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(ss / static_cast<double>(im.size())) - 1) < 1e-9);
    }
}

TEST_CASE("windows") {
    auto t = scalar_series("t", {10, 20, 30, 40, 50});
    std::vector<PropertySeries> props{t};
    auto w = make_windows(props, t, 2);
    REQUIRE(w.size() == 3);
    CHECK(w[0].target == 30);
    CHECK(w[2].target == 50);
    CHECK(w[2].time == 4 * 3600);
    CHECK(std::vector<double>(w[0].columns[0].values.begin(), w[0].columns[0].values.end()) == std::vector<double>{10, 20});
    CHECK(std::vector<double>(w[2].columns[0].values.begin(), w[2].columns[0].values.end()) == std::vector<double>{30, 40});

    auto t2 = scalar_series("t", {1, 2});
    std::vector<PropertySeries> short_props{t2};
    CHECK_THROWS_AS(make_windows(short_props, t2, 2), TooShort);

    std::vector<PropertySeries> two{scalar_series("a", std::vector<double>(10, 1)), scalar_series("b", std::vector<double>(10, 2))};
    auto w2 = make_windows(two, two[0], 3);
    CHECK(w2.size() == 7);
    CHECK(w2[0].columns.size() == 2);
    CHECK_THROWS_AS(make_windows(two, t, 1), CoverageGap);
}

TEST_CASE("matrix model") {
    std::vector<PropertySeries> props{scalar_series("a", {1, 2, 3}), scalar_series("b", {4, 5, 6}),
                                      scalar_series("c", {7, 8, 9})};
    auto w = make_windows(props, props[0], 2);
    CHECK(model_matrix(w[0], 2) == std::vector<double>{1, 2, 4, 5, 7, 8});
    std::vector<PropertySeries> one{props[1]};
    CHECK(model_matrix(make_windows(one, props[0], 2)[0], 2) == std::vector<double>{4, 5});
    std::vector<PropertySeries> tensor{tensor_series("d", {2, 2}, 3, 0)};
    CHECK_THROWS_AS(model_matrix(make_windows(tensor, props[0], 2)[0], 2), NonScalarProperty);
}

TEST_CASE("stacked model") {
    auto s = scalar_series("s", {1, 2, 3, 4});
    auto d = tensor_series("d", {3, 86}, 4, 1000);
    std::vector<PropertySeries> props{s, d};
    std::vector<Shape> shapes{s.shape, d.shape};
    CHECK(stacked_shape(shapes, 2) == std::vector<std::size_t>{4, 86, 2});
    auto w = make_windows(props, s, 2);
    auto x = model_stacked(w[1], 2);
    REQUIRE(x.size() == 4 * 86 * 2);
    auto at = [&](std::size_t r, std::size_t c, std::size_t k) { return x[(r * 86 + c) * 2 + k]; };
    CHECK(at(0, 0, 0) == 2);
    CHECK(at(0, 0, 1) == 3);
    for (std::size_t c = 1; c < 86; ++c) CHECK(at(0, c, 0) == 0);
    // distribution entry (r, c) at window tick k is 1000 + 100 * (1 + k) + r * 86 + c
    CHECK(at(1, 0, 0) == 1100);
    CHECK(at(3, 85, 1) == 1000 + 200 + 2 * 86 + 85);

    std::vector<PropertySeries> only{tensor_series("d", {88, 92}, 4, 0)};
    auto y = model_stacked(make_windows(only, s, 3)[0], 3);
    REQUIRE(y.size() == 88 * 92 * 3);
    bool equal = true;
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t j = 0; j < 88 * 92; ++j) equal = equal && y[j * 3 + k] == only[0].at(k)[j];
    CHECK(equal);

    std::vector<PropertySeries> scalars{scalar_series("a", {1, 2, 3}), scalar_series("b", {4, 5, 6})};
    std::vector<Shape> ss{scalars[0].shape, scalars[1].shape};
    CHECK(stacked_shape(ss, 2) == std::vector<std::size_t>{2, 1, 2});
    CHECK(model_stacked(make_windows(scalars, scalars[0], 2)[0], 2) == std::vector<double>{1, 2, 4, 5});
}

TEST_CASE("stacked packing is injective") {
    // every input entry lands in a distinct cell
    std::vector<PropertySeries> props{tensor_series("a", {2, 5}, 4, 0), scalar_series("b", {0, 0, 0, 0}),
                                      tensor_series("c", {3, 2}, 4, 0)};
    std::size_t total = 0;
    for (const auto& p : props) total += p.shape.size() * 3;
    // replace values by unique ids through a copy of the series
    std::vector<PropertySeries> ids = props;
    double next = 1;
    for (auto& p : ids)
        for (auto& v : p.values) v = next++;
    auto wi = make_windows(ids, ids[1], 3);
    auto x = model_stacked(wi[0], 3);
    std::vector<double> nonzero;
    for (double v : x)
        if (v != 0) nonzero.push_back(v);
    std::sort(nonzero.begin(), nonzero.end());
    CHECK(nonzero.size() == total);
    CHECK(std::adjacent_find(nonzero.begin(), nonzero.end()) == nonzero.end());
}

TEST_CASE("train/test split") {
    Dataset ds;
    ds.input_shape = {1, 1};
    ds.wn = 1;
    ds.times = {1, 2, 3, 4};
    ds.inputs = {10, 20, 30, 40};
    ds.targets = {0.1, 0.2, 0.3, 0.4};
    auto [train, test] = split_train_test(ds, 3);
    CHECK(train.times == std::vector<Timestamp>{1, 2});
    CHECK(test.times == std::vector<Timestamp>{3, 4});
    CHECK(test.inputs == std::vector<double>{30, 40});
    CHECK(train.targets == std::vector<double>{0.1, 0.2});
    CHECK_THROWS_AS(split_train_test(ds, 0), EmptySplit);
    CHECK_THROWS_AS(split_train_test(ds, 5), EmptySplit);
}

TEST_CASE("default range split") {
    // seven months before the boundary, one month after
    CHECK(default_split_boundary - default_range_start == (31 + 30 + 31 + 30 + 31 + 31 + 30) * 86400);
    CHECK(default_range_end - default_split_boundary == 31 * 86400);
    Dataset ds;
    ds.input_shape = {1, 1};
    ds.wn = 1;
    for (Timestamp t = default_range_start; t < default_range_end; t += 3600) {
        ds.times.push_back(t);
        ds.inputs.push_back(0);
        ds.targets.push_back(0);
    }
    auto [train, test] = split_train_test(ds, default_split_boundary);
    CHECK(train.times.back() == default_split_boundary - 3600);
    CHECK(test.times.front() == default_split_boundary);
    CHECK(train.size() + test.size() == ds.size());
    CHECK(test.size() == 31 * 24);
}

TEST_CASE("presets") {
    auto p1 = preset(1);
    CHECK(p1.properties == std::vector<std::string>{"volumeFrom", "volumeTo"});
    CHECK(p1.model == Model::matrix);
    CHECK(preset(4).properties == std::vector<std::string>{"highPrice_rel", "volumeFrom_rel", "volumeTo_rel"});
    CHECK(preset(5).properties == std::vector<std::string>{"accountBalanceDistribution"});
    auto p8 = preset(8);
    CHECK(p8.properties.size() == 4);
    CHECK(p8.model == Model::stacked);
    CHECK_THROWS_AS(preset(9), ValidationError);
    CHECK_THROWS_AS(preset(0), ValidationError);
}

TEST_CASE("build_dataset from a provider") {
    std::map<std::string, PropertySeries> store;
    std::vector<double> hp, vf, vt;
    for (int i = 0; i < 30; ++i) {
        hp.push_back(300 + 3 * std::sin(i));
        vf.push_back(10 + i * i);
        vt.push_back(2000 + 7 * i + i % 3);
    }
    store["highPrice"] = scalar_series("highPrice", hp);
    store["volumeFrom"] = scalar_series("volumeFrom", vf);
    store["volumeTo"] = scalar_series("volumeTo", vt);
    auto provider = map_provider(store);

    auto ds = build_preset(3, 4, NormChoice::prop, "highPrice", provider);
    CHECK(ds.size() == 26);
    CHECK(ds.model == Model::matrix);
    CHECK(ds.input_shape == std::vector<std::size_t>{3, 4});
    // matrix samples invert back to the raw values
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t k = 0; k < 3; ++k)
            for (std::size_t d = 0; d < 4; ++d) {
                double raw = store[ds.properties[k].name].values[i + d];
                CHECK(std::abs(invert(ds.properties[k].params, ds.sample(i)[ds.offset_of(k, 0, 0, d)]) - raw) < 1e-9);
            }
    CHECK(std::abs(invert(ds.target_params, ds.targets[0]) - hp[4]) < 1e-9);

    auto rel = build_preset(4, 4, NormChoice::prop, "highPrice_rel", provider);
    CHECK(rel.size() == 25);
    CHECK(rel.properties[0].params.kind == NormKind::around_zero);
    CHECK(rel.properties[1].params.kind == NormKind::basic);

    CHECK_THROWS_AS(build_preset(1, 4, NormChoice::prop, "closePrice", provider), MissingProperty);
    auto fit_early = build_preset(3, 4, NormChoice::basic, "highPrice", provider, 3600 * 10);
    CHECK(fit_early.properties[1].params.max == 91);
}

TEST_CASE("align_series trims to the common range") {
    auto a = scalar_series("a", {1, 2, 3, 4}, 0);
    auto b = scalar_series("b", {5, 6, 7}, 3600);
    auto out = align_series({a, b});
    CHECK(out[0].values == std::vector<double>{2, 3, 4});
    CHECK(out[1].values == std::vector<double>{5, 6, 7});
    auto c = scalar_series("c", {1, 2}, 100000);
    CHECK_THROWS_AS(align_series({a, c}), CoverageGap);
}

TEST_CASE("dataset file round trip") {
    std::map<std::string, PropertySeries> store;
    store["d"] = tensor_series("d", {3, 4}, 20, 5);
    store["highPrice"] = scalar_series("highPrice", std::vector<double>(20, 0));
    for (int i = 0; i < 20; ++i) store["highPrice"].values[static_cast<std::size_t>(i)] = 100 + (i * 7) % 11;
    DatasetSpec spec;
    spec.properties = {"d", "highPrice"};
    spec.target = "highPrice_rel";
    spec.wn = 3;
    spec.norm = NormChoice::image;
    auto ds = build_dataset(spec, map_provider(store));
    CHECK(ds.model == Model::stacked);
    CHECK(ds.input_shape == std::vector<std::size_t>{4, 4, 3});

    testing::TempDir dir("bpd");
    write_dataset(ds, dir / "a.bpd");
    auto back = read_dataset(dir / "a.bpd");
    write_dataset(back, dir / "b.bpd");
    CHECK(testing::read_file(dir / "a.bpd") == testing::read_file(dir / "b.bpd"));
    CHECK(back.properties == ds.properties);
    CHECK(back.target_params == ds.target_params);
    CHECK(back.times == ds.times);
    for (std::size_t i = 0; i < ds.inputs.size(); ++i) CHECK(back.inputs[i] == static_cast<float>(ds.inputs[i]));

    std::string bytes = encode_dataset(ds);
    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_dataset(bad), BadMagic);
    CHECK_THROWS_AS(decode_dataset(bytes.substr(0, bytes.size() - 3)), TruncatedPayload);
    CHECK_THROWS_AS(decode_dataset(bytes.substr(0, 6)), TruncatedPayload);
    CHECK_THROWS_AS(decode_dataset(bytes + "x"), ValidationError);
    std::string v2 = bytes;
    auto pos = v2.find("\"version\":1");
    REQUIRE(pos != std::string::npos);
    v2[pos + 10] = '2';
    CHECK_THROWS_AS(decode_dataset(v2), VersionMismatch);
    CHECK_THROWS_AS(read_dataset(dir / "missing.bpd"), IoError);
}
