#include "chainsight/ingest.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <nlohmann/json.hpp>

#include <fmt/format.h>

#include "chainsight/errors.hpp"

namespace chainsight::ingest {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const json& require(const json& obj, const char* name, std::uint64_t line_no) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) throw MissingField(line_no, name);
    return *it;
}

std::uint64_t as_u64(const json& v, const char* name, std::uint64_t line_no) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        auto i = v.get<std::int64_t>();
        if (i < 0) throw MalformedRecord(line_no, fmt::format("{} is negative", name));
        return static_cast<std::uint64_t>(i);
    }
    if (v.is_string()) {
        Amount a;
        if (!Amount::parse(v.get_ref<const std::string&>(), a) || a.saturated || a.value > UINT64_MAX)
            throw MalformedRecord(line_no, fmt::format("{} is not a u64", name));
        return static_cast<std::uint64_t>(a.value);
    }
    throw MalformedRecord(line_no, fmt::format("{} has wrong type", name));
}

Amount as_amount(const json& v, const char* name, std::uint64_t line_no) {
    if (v.is_number_unsigned()) return Amount::from_u64(v.get<std::uint64_t>());
    if (v.is_number_integer()) {
        auto i = v.get<std::int64_t>();
        if (i < 0) throw MalformedRecord(line_no, fmt::format("{} is negative", name));
        return Amount::from_u64(static_cast<std::uint64_t>(i));
    }
    if (v.is_string()) {
        Amount a;
        if (!Amount::parse(v.get_ref<const std::string&>(), a))
            throw MalformedRecord(line_no, fmt::format("{} is not a non-negative integer", name));
        return a;
    }
    throw MalformedRecord(line_no, fmt::format("{} has wrong type", name));
}

std::string lower(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string as_address(const json& v, const char* name, std::uint64_t line_no) {
    if (!v.is_string()) throw MalformedRecord(line_no, fmt::format("{} is not a string", name));
    return lower(v.get<std::string>());
}

std::string optional_address(const json& obj, const char* name, std::uint64_t line_no) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return {};
    return as_address(*it, name, line_no);
}

json parse_object(std::string_view line, std::uint64_t line_no) {
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) throw MalformedRecord(line_no, "not a JSON object");
    return obj;
}

Timestamp parse_i64(std::string_view s, std::uint64_t line_no, const char* name) {
    Timestamp v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw MalformedRecord(line_no, fmt::format("{} is not an integer", name));
    return v;
}

double parse_real(std::string_view s, std::uint64_t line_no, const char* name) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
        throw MalformedRecord(line_no, fmt::format("{} is not a finite number", name));
    return v;
}

template <class Record>
Record parse_any(std::string_view line, std::uint64_t line_no);

template <>
Block parse_any<Block>(std::string_view line, std::uint64_t line_no) {
    return parse_block(line, line_no);
}
template <>
Transaction parse_any<Transaction>(std::string_view line, std::uint64_t line_no) {
    return parse_transaction(line, line_no);
}
template <>
Trace parse_any<Trace>(std::string_view line, std::uint64_t line_no) {
    return parse_trace(line, line_no);
}
template <>
MarketTick parse_any<MarketTick>(std::string_view line, std::uint64_t line_no) {
    return parse_tick(line, line_no);
}

template <class Range, class Fn>
void write_lines(const std::filesystem::path& path, const Range& records, Fn&& encode, std::string_view header = {}) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (!header.empty()) out << header << '\n';
    for (const auto& r : records) out << encode(r) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace

Block parse_block(std::string_view line, std::uint64_t line_no) {
    json o = parse_object(line, line_no);
    Block b;
    const json& ts = require(o, "timestamp", line_no);
    if (!ts.is_number_integer()) throw MalformedRecord(line_no, "timestamp is not an integer");
    b.timestamp = ts.get<Timestamp>();
    b.number = as_u64(require(o, "number", line_no), "number", line_no);
    b.miner = as_address(require(o, "miner", line_no), "miner", line_no);
    b.size_bytes = as_u64(require(o, "size", line_no), "size", line_no);
    b.difficulty = as_amount(require(o, "difficulty", line_no), "difficulty", line_no);
    b.gas_limit = as_u64(require(o, "gasLimit", line_no), "gasLimit", line_no);
    b.gas_used = as_u64(require(o, "gasUsed", line_no), "gasUsed", line_no);
    auto tx_count = as_u64(require(o, "txCount", line_no), "txCount", line_no);
    if (tx_count > UINT32_MAX) throw MalformedRecord(line_no, "txCount exceeds u32");
    b.tx_count = static_cast<std::uint32_t>(tx_count);
    if (b.gas_used > b.gas_limit) throw MalformedRecord(line_no, "gasUsed exceeds gasLimit");
    return b;
}

Transaction parse_transaction(std::string_view line, std::uint64_t line_no) {
    json o = parse_object(line, line_no);
    Transaction tx;
    tx.block_number = as_u64(require(o, "blockNumber", line_no), "blockNumber", line_no);
    tx.from = as_address(require(o, "from", line_no), "from", line_no);
    if (tx.from.empty()) throw MalformedRecord(line_no, "from is empty");
    tx.to = optional_address(o, "to", line_no);
    tx.value_wei = as_amount(require(o, "value", line_no), "value", line_no);
    tx.gas_used = as_u64(require(o, "gasUsed", line_no), "gasUsed", line_no);
    tx.gas_price_wei = as_amount(require(o, "gasPrice", line_no), "gasPrice", line_no);
    if (auto it = o.find("inputSelector"); it != o.end() && !it->is_null()) {
        if (!it->is_string()) throw MalformedRecord(line_no, "inputSelector is not a string");
        std::string sel = lower(it->get<std::string>());
        if (sel.starts_with("0x")) sel.erase(0, 2);
        if (!sel.empty()) {
            if (sel.size() != 8 || sel.find_first_not_of("0123456789abcdef") != std::string::npos)
                throw MalformedRecord(line_no, "inputSelector must be 4 hex bytes");
            tx.input_selector = std::move(sel);
        }
    }
    return tx;
}

Trace parse_trace(std::string_view line, std::uint64_t line_no) {
    json o = parse_object(line, line_no);
    Trace tr;
    tr.block_number = as_u64(require(o, "blockNumber", line_no), "blockNumber", line_no);
    tr.from = as_address(require(o, "from", line_no), "from", line_no);
    tr.to = as_address(require(o, "to", line_no), "to", line_no);
    tr.value_wei = as_amount(require(o, "value", line_no), "value", line_no);
    const json& kind = require(o, "kind", line_no);
    if (kind == "call")
        tr.kind = TraceKind::call;
    else if (kind == "create")
        tr.kind = TraceKind::create;
    else
        throw MalformedRecord(line_no, "kind must be call or create");
    return tr;
}

std::vector<std::string> split_csv_row(std::string_view row) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < row.size(); ++i) {
        char c = row[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < row.size() && row[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r' || i + 1 != row.size()) {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

MarketTick parse_tick(std::string_view csv_row, std::uint64_t line_no) {
    auto f = split_csv_row(csv_row);
    if (f.size() != 7) throw MalformedRecord(line_no, fmt::format("expected 7 fields, got {}", f.size()));
    MarketTick t;
    t.time = parse_i64(f[0], line_no, "time");
    t.open = parse_real(f[1], line_no, "open");
    t.high = parse_real(f[2], line_no, "high");
    t.low = parse_real(f[3], line_no, "low");
    t.close = parse_real(f[4], line_no, "close");
    t.volume_from = parse_real(f[5], line_no, "volumefrom");
    t.volume_to = parse_real(f[6], line_no, "volumeto");
    if (t.time % tick_span != 0) throw MalformedRecord(line_no, "time is not hour-aligned");
    if (!(t.low <= t.open && t.low <= t.close && t.low <= t.high && t.open <= t.high && t.close <= t.high))
        throw MalformedRecord(line_no, "prices violate low <= open, close <= high");
    if (t.volume_from < 0 || t.volume_to < 0) throw MalformedRecord(line_no, "negative volume");
    return t;
}

std::string to_jsonl(const Block& b) {
    ordered_json o;
    o["timestamp"] = b.timestamp;
    o["number"] = b.number;
    o["miner"] = b.miner;
    o["size"] = b.size_bytes;
    o["difficulty"] = b.difficulty.to_decimal();
    o["gasLimit"] = b.gas_limit;
    o["gasUsed"] = b.gas_used;
    o["txCount"] = b.tx_count;
    return o.dump();
}

std::string to_jsonl(const Transaction& tx) {
    ordered_json o;
    o["blockNumber"] = tx.block_number;
    o["from"] = tx.from;
    o["to"] = tx.to;
    o["value"] = tx.value_wei.to_decimal();
    o["gasUsed"] = tx.gas_used;
    o["gasPrice"] = tx.gas_price_wei.to_decimal();
    if (tx.input_selector)
        o["inputSelector"] = *tx.input_selector;
    else
        o["inputSelector"] = nullptr;
    return o.dump();
}

std::string to_jsonl(const Trace& tr) {
    ordered_json o;
    o["blockNumber"] = tr.block_number;
    o["from"] = tr.from;
    o["to"] = tr.to;
    o["value"] = tr.value_wei.to_decimal();
    o["kind"] = tr.kind == TraceKind::create ? "create" : "call";
    return o.dump();
}

std::string to_csv_row(const MarketTick& t) {
    return fmt::format("{},{},{},{},{},{},{}", t.time, t.open, t.high, t.low, t.close, t.volume_from, t.volume_to);
}

template <class Record>
RecordReader<Record>::RecordReader(const std::filesystem::path& path, ReadOptions options)
    : in_(path, std::ios::binary), options_(options) {
    if (!in_) throw IoError("cannot open " + path.string());
    header_checked_ = !std::is_same_v<Record, MarketTick>;
}

template <class Record>
std::optional<Record> RecordReader<Record>::next() {
    while (std::getline(in_, line_)) {
        ++line_no_;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        if (!header_checked_) {
            header_checked_ = true;
            if (line_ != tick_csv_header) throw MalformedRecord(line_no_, "expected header " + std::string(tick_csv_header));
            continue;
        }
        if (line_.empty()) continue;
        try {
            return parse_any<Record>(line_, line_no_);
        } catch (const ValidationError&) {
            if (!options_.skip_bad_records) throw;
            ++skipped_;
        }
    }
    if (in_.bad()) throw IoError("read failed at line " + std::to_string(line_no_));
    return std::nullopt;
}

template class RecordReader<Block>;
template class RecordReader<Transaction>;
template class RecordReader<Trace>;
template class RecordReader<MarketTick>;

BlockReader read_blocks(const std::filesystem::path& path, ReadOptions options) { return BlockReader(path, options); }
TransactionReader read_transactions(const std::filesystem::path& path, ReadOptions options) {
    return TransactionReader(path, options);
}
TraceReader read_traces(const std::filesystem::path& path, ReadOptions options) { return TraceReader(path, options); }
TickReader read_ticks(const std::filesystem::path& path, ReadOptions options) { return TickReader(path, options); }

void write_blocks(const std::filesystem::path& path, std::span<const Block> blocks) {
    write_lines(path, blocks, [](const Block& b) { return to_jsonl(b); });
}
void write_transactions(const std::filesystem::path& path, std::span<const Transaction> txs) {
    write_lines(path, txs, [](const Transaction& t) { return to_jsonl(t); });
}
void write_traces(const std::filesystem::path& path, std::span<const Trace> traces) {
    write_lines(path, traces, [](const Trace& t) { return to_jsonl(t); });
}
void write_ticks(const std::filesystem::path& path, std::span<const MarketTick> ticks) {
    write_lines(path, ticks, [](const MarketTick& t) { return to_csv_row(t); }, tick_csv_header);
}

void ChainValidator::add(const Block& b) {
    if (last_number_) {
        if (b.number > *last_number_ + 1) report_.gaps.emplace_back(*last_number_ + 1, b.number - 1);
        if (b.timestamp < last_timestamp_) report_.timestamp_regressions.push_back(b.number);
    }
    last_number_ = b.number;
    last_timestamp_ = b.timestamp;
}

ValidationReport validate_chain(std::span<const Block> blocks) {
    ChainValidator v;
    for (const auto& b : blocks) v.add(b);
    return v.report();
}

} // namespace chainsight::ingest
