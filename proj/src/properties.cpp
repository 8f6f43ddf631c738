#include "chainsight/properties.hpp"

#include <fstream>

#include <fmt/format.h>

#include "chainsight/bytes.hpp"
#include "chainsight/errors.hpp"

namespace chainsight::properties {

void PropertySeries::push(Timestamp t, std::span<const double> v) {
    if (v.size() != shape.size())
        throw ValidationError(fmt::format("property {}: tensor of {} values, expected {}", name, v.size(), shape.size()));
    times.push_back(t);
    values.insert(values.end(), v.begin(), v.end());
}

void PropertySeries::validate() const {
    if (values.size() != times.size() * shape.size())
        throw ValidationError(fmt::format("property {}: {} values for {} ticks", name, values.size(), times.size()));
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1]) throw ValidationError(fmt::format("property {}: times not increasing", name));
}

TickChainStats summarize_tick(std::span<const Block> blocks, std::span<const Transaction> txs,
                              std::uint64_t dapp_operations, std::uint64_t unique_accounts) {
    TickChainStats s;
    s.block_count = blocks.size();
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        s.size_sum += static_cast<double>(b.size_bytes);
        s.difficulty_sum += b.difficulty.to_double();
        s.gas_limit_sum += static_cast<double>(b.gas_limit);
        s.gas_used_sum += static_cast<double>(b.gas_used);
        if (i == 0) s.first_block_time = b.timestamp;
        s.last_block_time = b.timestamp;
    }
    s.tx_count = txs.size();
    for (const auto& tx : txs) s.gas_price_sum += tx.gas_price_wei.to_double();
    s.dapp_operations = dapp_operations;
    s.unique_accounts = unique_accounts;
    return s;
}

const std::vector<std::string>& scalar_property_names() {
    static const std::vector<std::string> names{
        "openPrice",  "closePrice",      "highPrice",  "stickPrice", "volumeTo", "volumeFrom",
        "transactionCount", "dappOperations", "blockSize", "difficulty", "uniqueAccounts", "gasLimit",
        "gasPrice",   "gasUsed",         "networkHashrate", "ETHSupply", "blockchainGrowth"};
    return names;
}

std::vector<PropertySeries> compute_scalar_properties(std::span<const MarketTick> ticks,
                                                      std::span<const TickChainStats> chain,
                                                      const PropertyConfig& config,
                                                      const PropertySeries* pending_tx) {
    if (ticks.size() != chain.size())
        throw CoverageGap(fmt::format("{} market ticks but {} chain ticks", ticks.size(), chain.size()));
    for (std::size_t i = 1; i < ticks.size(); ++i)
        if (ticks[i].time != ticks[i - 1].time + tick_span)
            throw CoverageGap(fmt::format("no market data for tick {}", ticks[i - 1].time + tick_span));

    static const std::vector<std::string> units{"USD", "USD", "USD", "USD", "volume", "volume",
                                                "transactions", "transactions", "bytes", "difficulty", "accounts",
                                                "gas", "wei", "gas", "hashes/s", "ETH", "GB"};
    const auto& names = scalar_property_names();
    std::vector<PropertySeries> out(names.size());
    for (std::size_t k = 0; k < names.size(); ++k) {
        out[k].name = names[k];
        out[k].unit = units[k];
        out[k].times.reserve(ticks.size());
        out[k].values.reserve(ticks.size());
    }

    double supply = 0;
    for (std::size_t i = 0; i < ticks.size(); ++i) {
        const auto& t = ticks[i];
        const auto& c = chain[i];
        auto mean = [&](double sum) { return c.block_count == 0 ? 0.0 : sum / static_cast<double>(c.block_count); };
        double mean_difficulty = mean(c.difficulty_sum);
        double hashrate = 0;
        if (c.block_count >= 2 && c.last_block_time > c.first_block_time) {
            double interval = static_cast<double>(c.last_block_time - c.first_block_time) /
                              static_cast<double>(c.block_count - 1);
            hashrate = mean_difficulty / interval;
        }
        supply += static_cast<double>(c.block_count) * config.block_reward_eth;

        const double row[] = {t.open,
                              t.close,
                              t.high,
                              t.open - t.close,
                              t.volume_to,
                              t.volume_from,
                              static_cast<double>(c.tx_count),
                              static_cast<double>(c.dapp_operations),
                              mean(c.size_sum),
                              mean_difficulty,
                              static_cast<double>(c.unique_accounts),
                              mean(c.gas_limit_sum),
                              c.tx_count == 0 ? 0.0 : c.gas_price_sum / static_cast<double>(c.tx_count),
                              mean(c.gas_used_sum),
                              hashrate,
                              supply,
                              c.size_sum / 1e9};
        for (std::size_t k = 0; k < names.size(); ++k) out[k].push(t.time, row[k]);
    }

    if (pending_tx) {
        PropertySeries p = *pending_tx;
        p.name = "pendingTx";
        if (!p.shape.scalar() || p.times != out[0].times)
            throw CoverageGap("pendingTx series does not cover the tick range");
        out.push_back(std::move(p));
    }
    return out;
}

PropertySeries to_relative(const PropertySeries& series) {
    if (!series.shape.scalar()) throw ValidationError("to_relative needs a scalar series: " + series.name);
    if (series.size() < 2) throw TooShort(fmt::format("{} has {} values; _rel needs at least 2", series.name, series.size()));
    PropertySeries rel;
    rel.name = series.name + "_rel";
    rel.unit = series.unit;
    rel.shape = series.shape;
    rel.times.assign(series.times.begin() + 1, series.times.end());
    rel.values.reserve(series.size() - 1);
    for (std::size_t i = 0; i + 1 < series.size(); ++i) rel.values.push_back(series.values[i + 1] - series.values[i]);
    return rel;
}

std::vector<MarketTick> align_ticks(std::span<const MarketTick> ticks, Timestamp start, Timestamp end,
                                    bool forward_fill) {
    if (start % tick_span != 0 || end % tick_span != 0) throw ValidationError("tick range must be hour-aligned");
    std::vector<MarketTick> out;
    std::size_t j = 0;
    std::optional<MarketTick> prev;
    for (Timestamp t = start; t < end; t += tick_span) {
        while (j < ticks.size() && ticks[j].time < t) prev = ticks[j++];
        if (j < ticks.size() && ticks[j].time == t) {
            prev = ticks[j++];
            out.push_back(*prev);
            continue;
        }
        if (!forward_fill || !prev) throw CoverageGap(fmt::format("no market data for tick {}", t));
        MarketTick fill{t, prev->close, prev->close, prev->close, prev->close, 0.0, 0.0};
        out.push_back(fill);
        prev = fill;
    }
    return out;
}

std::string store_series_name(const std::string& property) { return "prop." + property; }

std::string encode_tensor(Shape shape, std::span<const double> values) {
    std::string buf;
    bytes::append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(shape.rows));
    bytes::append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(shape.cols));
    for (double v : values) bytes::append_le<double>(buf, v);
    return buf;
}

Shape decode_tensor(std::string_view payload, std::vector<double>& out) {
    bytes::Reader r(payload);
    Shape s;
    s.rows = r.read_le<std::uint32_t>();
    s.cols = r.read_le<std::uint32_t>();
    for (std::size_t i = 0; i < s.size(); ++i) out.push_back(r.read_le<double>());
    if (!r.done()) throw ValidationError("trailing bytes in tensor payload");
    return s;
}

void put_series(ingest::Store& store, const PropertySeries& series) {
    series.validate();
    std::vector<ingest::StoreRecord> records;
    records.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) records.push_back({series.times[i], encode_tensor(series.shape, series.at(i))});
    store.put(store_series_name(series.name), records);
}

namespace {

PropertySeries from_records(const std::string& name, const std::vector<ingest::StoreRecord>& records) {
    PropertySeries s;
    s.name = name;
    for (std::size_t i = 0; i < records.size(); ++i) {
        Shape shape = decode_tensor(records[i].payload, s.values);
        if (i == 0)
            s.shape = shape;
        else if (!(shape == s.shape))
            throw ValidationError("property " + name + " changes shape over time");
        s.times.push_back(records[i].time);
    }
    s.validate();
    return s;
}

} // namespace

PropertySeries get_series(const ingest::Store& store, const std::string& name, Timestamp from, Timestamp to) {
    return from_records(name, store.get(store_series_name(name), from, to));
}

PropertySeries get_series(const ingest::Store& store, const std::string& name) {
    return from_records(name, store.get_all(store_series_name(name)));
}

void write_csv(const PropertySeries& series, const std::filesystem::path& path) {
    if (!series.shape.scalar()) throw ValidationError("CSV export needs a scalar series: " + series.name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "time,value\n";
    for (std::size_t i = 0; i < series.size(); ++i) out << fmt::format("{},{}\n", series.times[i], series.values[i]);
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace chainsight::properties
