#include <doctest.h>

#include "chainsight/errors.hpp"
#include "chainsight/fixture.hpp"
#include "chainsight/hash.hpp"
#include "chainsight/ingest.hpp"
#include "chainsight/pipeline.hpp"
#include "pipeline_support.hpp"
#include "test_support.hpp"

using namespace chainsight;
using namespace chainsight::pipeline;
using nlohmann::json;

namespace {

PipelineConfig fixture_config(const testing::TempDir& dir, std::uint64_t seed = 3, std::uint64_t blocks = 300) {
    auto info = generate_fixture(seed, blocks, 60, dir / "fx");
    auto cfg = load_config(info.config);
    cfg.store = dir / "store";
    cfg.train.epochs = 3;
    return cfg;
}

} // namespace

TEST_CASE("config parsing") {
    json j = {{"blocks", "b.jsonl"},
              {"store", "st"},
              {"start", "2017-03-01"},
              {"end", 1509494400},
              {"boundary", "2017-10-01T00:00:00Z"},
              {"preset", 4},
              {"wn", 5},
              {"norm", "image"},
              {"target", "highPrice_rel"},
              {"model", "mlp"},
              {"hidden", 12},
              {"seed", 9},
              {"train", {{"batch_size", 8}, {"learning_rate", 1e-3}, {"epochs", 2}}},
              {"ledger", {{"miner_reward_wei", "5000000000000000000"}}}};
    auto cfg = config_from_json(j, "/data");
    CHECK(*cfg.blocks == std::filesystem::path("/data/b.jsonl"));
    CHECK(cfg.store == std::filesystem::path("/data/st"));
    CHECK(cfg.start == 1488326400);
    CHECK(cfg.boundary == 1506816000);
    CHECK(cfg.preset == 4);
    CHECK(cfg.wn == 5);
    CHECK(cfg.norm == datasetgen::NormChoice::image);
    CHECK(cfg.model == modeling::PredictorKind::mlp);
    CHECK(cfg.hidden == 12);
    CHECK(cfg.train.batch_size == 8);
    CHECK(cfg.train.epochs == 2);
    CHECK(cfg.train.seed == 9);
    CHECK(cfg.ledger.miner_reward.value == static_cast<u128>(5'000'000'000'000'000'000ULL));
    CHECK_NOTHROW(cfg.validate());

    auto defaults = config_from_json(json::object(), ".");
    CHECK(defaults.start == datasetgen::default_range_start);
    CHECK(defaults.end == datasetgen::default_range_end);
    CHECK(defaults.boundary == datasetgen::default_split_boundary);
    CHECK(defaults.train.batch_size == 16);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(config_from_json(json{{"colour", 1}}, "."), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"start", "March"}}, "."), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"norm", "zscore"}}, "."), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"ledger", {{"miner_reward_wei", "lots"}}}}, "."), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::array(), "."), ConfigError);
    auto cfg = config_from_json(json::object(), ".");
    cfg.boundary = cfg.end;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = config_from_json(json::object(), ".");
    cfg.preset = 9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = config_from_json(json::object(), ".");
    cfg.start += 5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    testing::TempDir dir("cfg");
    CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
    testing::write_file(dir / "bad.json", "{not json");
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("fixture generation") {
    testing::TempDir a("fxa"), b("fxb");
    auto ia = generate_fixture(5, 120, 40, a.path());
    auto ib = generate_fixture(5, 120, 40, b.path());
    CHECK(testing::tree_hashes(a.path()) == testing::tree_hashes(b.path()));
    CHECK(ia.transaction_count > 0);
    CHECK(ia.contract_count > 0);
    CHECK(ia.start < ia.boundary);
    CHECK(ia.boundary < ia.end);

    auto blocks = ingest::read_all(ingest::read_blocks(ia.blocks));
    CHECK(blocks.size() == 120);
    CHECK(ingest::validate_chain(blocks).empty());

    testing::TempDir c("fxc");
    generate_fixture(6, 120, 40, c.path());
    CHECK(testing::tree_hashes(a.path()) != testing::tree_hashes(c.path()));

    CHECK_THROWS_AS(generate_fixture(5, 0, 40, c / "zero"), ValidationError);
    CHECK_THROWS_AS(generate_fixture(5, 10, 1, c / "one"), ValidationError);
}

TEST_CASE("random walk ticks") {
    auto ticks = random_walk_ticks(1, 50);
    REQUIRE(ticks.size() == 50);
    CHECK(ticks[0].high == 300);
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        CHECK(ticks[i].time == fixture_start + static_cast<Timestamp>(3600 * i));
        CHECK(ticks[i].open <= ticks[i].high);
        CHECK(ticks[i].close <= ticks[i].high);
        CHECK(ticks[i].low <= std::min(ticks[i].open, ticks[i].close));
    }
    CHECK(random_walk_ticks(1, 50)[49].high == ticks[49].high);
}

TEST_CASE("run-all is deterministic and matches the individual stages") {
    testing::TempDir d1("ra1"), d2("ra2");
    auto c1 = fixture_config(d1);
    auto c2 = fixture_config(d2);
    auto m1 = run_all(c1);
    CHECK(std::isfinite(m1.mse));
    CHECK(std::isfinite(m1.r2));
    CHECK(m1.n > 0);

    run_ingest(c2);
    run_properties(c2);
    run_distributions(c2);
    run_dataset(c2);
    run_train(c2);
    auto m2 = run_evaluate(c2);
    run_export_plot(c2);
    CHECK(m1.mse == m2.mse);
    auto h1 = testing::tree_hashes(c1.store);
    auto h2 = testing::tree_hashes(c2.store);
    CHECK(h1 == h2);
    CHECK(h1.count("dataset.bpd") == 1);
    CHECK(h1.count("model.ckpt") == 1);
    CHECK(h1.count("metrics.json") == 1);
    CHECK(h1.count("predictions.csv") == 1);

    // rerunning a stage over its own output is idempotent
    run_properties(c1);
    run_distributions(c1);
    CHECK(testing::tree_hashes(c1.store) == h1);
}

TEST_CASE("thread count does not change the output") {
    testing::TempDir d1("th1"), d2("th2");
    auto c1 = fixture_config(d1, 4);
    auto c2 = fixture_config(d2, 4);
    c2.threads = 3;
    run_all(c1);
    run_all(c2);
    CHECK(testing::tree_hashes(c1.store) == testing::tree_hashes(c2.store));
}

TEST_CASE("replayed ticks") {
    testing::TempDir d("rt");
    auto cfg = fixture_config(d, 8);
    run_ingest(cfg);
    ingest::Store store(cfg.store);
    std::vector<Timestamp> ticks;
    std::uint64_t last_unique = 0;
    bool monotone = true;
    auto report = replay_ticks(store, cfg, [&](TickState&& s) {
        ticks.push_back(s.tick);
        monotone = monotone && s.snapshot.unique_accounts >= last_unique;
        last_unique = s.snapshot.unique_accounts;
        CHECK(s.snapshot.tick_time == s.tick + 3600);
    });
    CHECK(monotone);
    CHECK(report.clamp_events == 0);
    REQUIRE(!ticks.empty());
    CHECK(ticks.front() == cfg.start);
    CHECK(ticks.back() == cfg.end - 3600);
    for (std::size_t i = 1; i < ticks.size(); ++i) CHECK(ticks[i] - ticks[i - 1] == 3600);

    auto series = run_properties(cfg);
    for (const auto& s : series)
        if (s.name == "uniqueAccounts")
            for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.values[i] >= s.values[i - 1]);
}

TEST_CASE("stages validate their inputs") {
    testing::TempDir d("mi");
    auto cfg = fixture_config(d, 2, 600);
    CHECK_THROWS_AS(run_dataset(cfg), MissingProperty);
    CHECK_THROWS_AS(run_evaluate(cfg), MissingInput);
    auto no_blocks = cfg;
    no_blocks.blocks = d / "nowhere.jsonl";
    CHECK_THROWS_AS(run_ingest(no_blocks), MissingInput);

    run_ingest(cfg);
    run_properties(cfg);
    auto p1 = cfg;
    p1.preset = 1;
    p1.target = "highPrice";
    run_dataset(p1);
    CHECK_THROWS_AS(run_evaluate(p1, modeling::PredictorKind::persistence), TargetNotInWindow);
    auto p3 = p1;
    p3.preset = 3;
    run_dataset(p3);
    auto m = run_evaluate(p3, modeling::PredictorKind::persistence);
    CHECK(m.r2 > 0.5);
}

TEST_CASE("metrics json layout") {
    modeling::MetricsReport m;
    m.mse = 4;
    m.rmse = 2;
    m.n = 3;
    auto j = metrics_json(m, "linear", "highPrice");
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"model", "target", "n", "mse", "rmse", "r2", "r2_mean_baseline", "sign", "sign_n"});
}
