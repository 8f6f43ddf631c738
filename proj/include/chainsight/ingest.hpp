#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chainsight/records.hpp"

namespace chainsight::ingest {

struct ReadOptions {
    // Count and drop malformed lines instead of aborting.
    bool skip_bad_records = false;
};

// Single-consumer stream over a JSONL (blocks, transactions, traces) or CSV
// (ticks) file. Holds one line in memory at a time.
template <class Record>
class RecordReader {
  public:
    explicit RecordReader(const std::filesystem::path& path, ReadOptions options = {});

    // Next record in file order, or nullopt at end of file.
    std::optional<Record> next();

    std::uint64_t skipped() const { return skipped_; }
    std::uint64_t line_no() const { return line_no_; }

  private:
    std::ifstream in_;
    std::string line_;
    ReadOptions options_;
    std::uint64_t line_no_ = 0;
    std::uint64_t skipped_ = 0;
    bool header_checked_ = false;
};

using BlockReader = RecordReader<Block>;
using TransactionReader = RecordReader<Transaction>;
using TraceReader = RecordReader<Trace>;
using TickReader = RecordReader<MarketTick>;

BlockReader read_blocks(const std::filesystem::path& path, ReadOptions options = {});
TransactionReader read_transactions(const std::filesystem::path& path, ReadOptions options = {});
TraceReader read_traces(const std::filesystem::path& path, ReadOptions options = {});
TickReader read_ticks(const std::filesystem::path& path, ReadOptions options = {});

template <class Record>
std::vector<Record> read_all(RecordReader<Record>&& reader) {
    std::vector<Record> out;
    while (auto r = reader.next()) out.push_back(std::move(*r));
    return out;
}

// Line-level codecs. line_no is only used for error reporting.
Block parse_block(std::string_view line, std::uint64_t line_no = 0);
Transaction parse_transaction(std::string_view line, std::uint64_t line_no = 0);
Trace parse_trace(std::string_view line, std::uint64_t line_no = 0);
MarketTick parse_tick(std::string_view csv_row, std::uint64_t line_no = 0);

std::string to_jsonl(const Block& b);
std::string to_jsonl(const Transaction& tx);
std::string to_jsonl(const Trace& tr);
std::string to_csv_row(const MarketTick& t);

inline constexpr std::string_view tick_csv_header = "time,open,high,low,close,volumefrom,volumeto";

// Splits one RFC-4180 row (quoted fields, doubled quotes) into fields.
std::vector<std::string> split_csv_row(std::string_view row);

void write_blocks(const std::filesystem::path& path, std::span<const Block> blocks);
void write_transactions(const std::filesystem::path& path, std::span<const Transaction> txs);
void write_traces(const std::filesystem::path& path, std::span<const Trace> traces);
void write_ticks(const std::filesystem::path& path, std::span<const MarketTick> ticks);

struct ValidationReport {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> gaps; // inclusive missing intervals
    std::vector<std::uint64_t> timestamp_regressions;          // numbers of offending blocks

    bool empty() const { return gaps.empty() && timestamp_regressions.empty(); }
};

// Incremental form of validate_chain for streamed input sorted by number.
class ChainValidator {
  public:
    void add(const Block& b);
    const ValidationReport& report() const { return report_; }

  private:
    ValidationReport report_;
    std::optional<std::uint64_t> last_number_;
    Timestamp last_timestamp_ = 0;
};

ValidationReport validate_chain(std::span<const Block> blocks);

} // namespace chainsight::ingest
