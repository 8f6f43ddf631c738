#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "chainsight/records.hpp"

namespace chainsight::ingest {

// One time-stamped opaque payload. The store never interprets payload bytes.
struct StoreRecord {
    Timestamp time = 0;
    std::string payload;

    bool operator==(const StoreRecord&) const = default;
};

inline constexpr Timestamp default_chunk_span = 86400;

// Chunked time-series store on the local filesystem.
//
// Layout: <root>/<series>/<chunk_start>.chunk, where chunk_start is a multiple
// of the chunk span. Each chunk holds the records with time in
// [chunk_start, chunk_start + span), ordered by time. Readers of a series may
// run concurrently; writers to one series are exclusive.
class Store {
  public:
    explicit Store(std::filesystem::path root, Timestamp chunk_span = default_chunk_span);

    const std::filesystem::path& root() const { return root_; }
    Timestamp chunk_span() const { return span_; }

    // records must be ordered by time. Records already present (same time and
    // payload) are not duplicated, so repeating a put is a no-op.
    void put(const std::string& series, std::span<const StoreRecord> records);

    // Records with time in [from, to), across chunk boundaries, in time order.
    // Throws UnknownSeries if the series was never written.
    std::vector<StoreRecord> get(const std::string& series, Timestamp from, Timestamp to) const;

    // Entire series.
    std::vector<StoreRecord> get_all(const std::string& series) const;

    // Drops every chunk of the series; a no-op for unknown series.
    void erase(const std::string& series);

    bool has_series(const std::string& series) const;
    std::vector<std::string> list_series() const;
    std::vector<Timestamp> chunk_starts(const std::string& series) const;

  private:
    std::shared_mutex& lock_for(const std::string& series) const;
    std::filesystem::path series_dir(const std::string& series) const;
    std::filesystem::path chunk_path(const std::string& series, Timestamp start) const;
    std::vector<StoreRecord> read_chunk(const std::filesystem::path& path) const;
    void write_chunk(const std::filesystem::path& path, Timestamp start, const std::vector<StoreRecord>& records) const;

    std::filesystem::path root_;
    Timestamp span_;
    mutable std::mutex locks_mu_;
    mutable std::map<std::string, std::unique_ptr<std::shared_mutex>> locks_;
};

} // namespace chainsight::ingest
