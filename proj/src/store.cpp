#include "chainsight/store.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "chainsight/bytes.hpp"
#include "chainsight/errors.hpp"

namespace chainsight::ingest {

namespace {

constexpr std::string_view chunk_magic = "BPC1";

Timestamp floor_to(Timestamp t, Timestamp span) {
    Timestamp q = t / span;
    if (t % span != 0 && t < 0) --q;
    return q * span;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void check_series_name(const std::string& name) {
    if (name.empty() || name == "." || name == ".." || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos)
        throw ValidationError("invalid series name '" + name + "'");
}

} // namespace

Store::Store(std::filesystem::path root, Timestamp chunk_span) : root_(std::move(root)), span_(chunk_span) {
    if (span_ <= 0) throw ValidationError("chunk span must be positive");
}

std::shared_mutex& Store::lock_for(const std::string& series) const {
    std::lock_guard g(locks_mu_);
    auto& slot = locks_[series];
    if (!slot) slot = std::make_unique<std::shared_mutex>();
    return *slot;
}

std::filesystem::path Store::series_dir(const std::string& series) const {
    check_series_name(series);
    return root_ / series;
}

std::filesystem::path Store::chunk_path(const std::string& series, Timestamp start) const {
    return series_dir(series) / fmt::format("{}.chunk", start);
}

std::vector<StoreRecord> Store::read_chunk(const std::filesystem::path& path) const {
    std::string data = slurp(path);
    bytes::Reader r(data);
    if (r.take(chunk_magic.size()) != chunk_magic) throw BadMagic("not a chunk file: " + path.string());
    auto start = r.read_le<std::int64_t>();
    auto span = r.read_le<std::int64_t>();
    auto count = r.read_le<std::uint32_t>();
    std::vector<StoreRecord> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        StoreRecord rec;
        rec.time = r.read_le<std::int64_t>();
        auto len = r.read_le<std::uint32_t>();
        rec.payload = std::string(r.take(len));
        if (rec.time < start || rec.time >= start + span)
            throw ValidationError("chunk " + path.string() + " holds a record outside its interval");
        out.push_back(std::move(rec));
    }
    return out;
}

void Store::write_chunk(const std::filesystem::path& path, Timestamp start,
                        const std::vector<StoreRecord>& records) const {
    std::string buf(chunk_magic);
    bytes::append_le<std::int64_t>(buf, start);
    bytes::append_le<std::int64_t>(buf, span_);
    bytes::append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(records.size()));
    for (const auto& rec : records) {
        bytes::append_le<std::int64_t>(buf, rec.time);
        bytes::append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(rec.payload.size()));
        buf += rec.payload;
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

void Store::put(const std::string& series, std::span<const StoreRecord> records) {
    auto dir = series_dir(series);
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].time < records[i - 1].time) throw ValidationError("store_put: records of '" + series + "' are not time-ordered");

    std::unique_lock lock(lock_for(series));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    std::size_t i = 0;
    while (i < records.size()) {
        Timestamp start = floor_to(records[i].time, span_);
        std::size_t j = i;
        while (j < records.size() && records[j].time < start + span_) ++j;

        auto path = chunk_path(series, start);
        std::vector<StoreRecord> merged;
        if (std::filesystem::exists(path)) merged = read_chunk(path);
        std::set<std::pair<Timestamp, std::string_view>> present;
        for (const auto& r : merged) present.emplace(r.time, r.payload);

        std::vector<StoreRecord> fresh;
        for (std::size_t k = i; k < j; ++k)
            if (!present.contains({records[k].time, records[k].payload})) fresh.push_back(records[k]);
        if (!fresh.empty()) {
            merged.insert(merged.end(), fresh.begin(), fresh.end());
            std::stable_sort(merged.begin(), merged.end(),
                             [](const StoreRecord& a, const StoreRecord& b) { return a.time < b.time; });
            write_chunk(path, start, merged);
        } else if (!std::filesystem::exists(path)) {
            write_chunk(path, start, merged);
        }
        i = j;
    }
}

std::vector<Timestamp> Store::chunk_starts(const std::string& series) const {
    auto dir = series_dir(series);
    if (!std::filesystem::is_directory(dir)) throw UnknownSeries(series);
    std::vector<Timestamp> starts;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".chunk") continue;
        try {
            starts.push_back(std::stoll(entry.path().stem().string()));
        } catch (const std::exception&) {
            continue;
        }
    }
    std::sort(starts.begin(), starts.end());
    return starts;
}

std::vector<StoreRecord> Store::get(const std::string& series, Timestamp from, Timestamp to) const {
    auto dir = series_dir(series);
    if (!std::filesystem::is_directory(dir)) throw UnknownSeries(series);
    std::shared_lock lock(lock_for(series));
    std::vector<StoreRecord> out;
    if (from >= to) return out;
    for (Timestamp start : chunk_starts(series)) {
        if (start + span_ <= from || start >= to) continue;
        for (auto& rec : read_chunk(chunk_path(series, start)))
            if (rec.time >= from && rec.time < to) out.push_back(std::move(rec));
    }
    return out;
}

std::vector<StoreRecord> Store::get_all(const std::string& series) const {
    auto dir = series_dir(series);
    if (!std::filesystem::is_directory(dir)) throw UnknownSeries(series);
    std::shared_lock lock(lock_for(series));
    std::vector<StoreRecord> out;
    for (Timestamp start : chunk_starts(series))
        for (auto& rec : read_chunk(chunk_path(series, start))) out.push_back(std::move(rec));
    return out;
}

void Store::erase(const std::string& series) {
    auto dir = series_dir(series);
    std::unique_lock lock(lock_for(series));
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
    if (ec) throw IoError("cannot remove " + dir.string() + ": " + ec.message());
}

bool Store::has_series(const std::string& series) const { return std::filesystem::is_directory(series_dir(series)); }

std::vector<std::string> Store::list_series() const {
    std::vector<std::string> names;
    if (!std::filesystem::is_directory(root_)) return names;
    for (const auto& entry : std::filesystem::directory_iterator(root_))
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

} // namespace chainsight::ingest
