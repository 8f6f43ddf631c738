#include "chainsight/rpc.hpp"

#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "chainsight/errors.hpp"

namespace chainsight::ingest {

using nlohmann::json;

namespace {

std::uint64_t hex_u64(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || !it->is_string()) throw RpcError(-32602, fmt::format("block field {} missing", name));
    Amount a;
    if (!Amount::parse(it->get_ref<const std::string&>(), a) || a.saturated || a.value > UINT64_MAX)
        throw RpcError(-32602, fmt::format("block field {} is not a quantity", name));
    return static_cast<std::uint64_t>(a.value);
}

Amount hex_amount(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || !it->is_string()) throw RpcError(-32602, fmt::format("field {} missing", name));
    Amount a;
    if (!Amount::parse(it->get_ref<const std::string&>(), a))
        throw RpcError(-32602, fmt::format("field {} is not a quantity", name));
    return a;
}

std::string lower_string(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) return {};
    if (!it->is_string()) throw RpcError(-32602, fmt::format("field {} is not a string", name));
    std::string s = it->get<std::string>();
    for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string hex(std::uint64_t v) { return fmt::format("0x{:x}", v); }

struct Endpoint {
    std::string scheme_host_port;
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

std::string make_get_block_request(std::uint64_t number, std::uint64_t id) {
    json req = {{"jsonrpc", "2.0"}, {"id", id}, {"method", "eth_getBlockByNumber"}, {"params", {hex(number), true}}};
    return req.dump();
}

BlockWithTransactions decode_rpc_block(const json& result) {
    if (!result.is_object()) throw RpcError(-32602, "block result is not an object");
    BlockWithTransactions out;
    Block& b = out.block;
    b.number = hex_u64(result, "number");
    b.timestamp = static_cast<Timestamp>(hex_u64(result, "timestamp"));
    b.miner = lower_string(result, "miner");
    b.size_bytes = hex_u64(result, "size");
    b.difficulty = hex_amount(result, "difficulty");
    b.gas_limit = hex_u64(result, "gasLimit");
    b.gas_used = hex_u64(result, "gasUsed");

    auto txs = result.find("transactions");
    if (txs != result.end() && txs->is_array()) {
        for (const auto& t : *txs) {
            if (!t.is_object()) throw RpcError(-32602, "transactions must be full objects");
            Transaction tx;
            tx.block_number = b.number;
            tx.from = lower_string(t, "from");
            tx.to = lower_string(t, "to");
            tx.value_wei = hex_amount(t, "value");
            tx.gas_used = t.contains("gasUsed") ? hex_u64(t, "gasUsed") : hex_u64(t, "gas");
            tx.gas_price_wei = hex_amount(t, "gasPrice");
            std::string input = lower_string(t, "input");
            if (input.size() >= 10 && input.starts_with("0x")) tx.input_selector = input.substr(2, 8);
            out.transactions.push_back(std::move(tx));
        }
    }
    b.tx_count = static_cast<std::uint32_t>(out.transactions.size());
    return out;
}

json encode_rpc_block(const Block& block, std::span<const Transaction> txs) {
    json transactions = json::array();
    for (std::size_t i = 0; i < txs.size(); ++i) {
        const auto& tx = txs[i];
        json t = {{"blockNumber", hex(block.number)},
                  {"transactionIndex", hex(i)},
                  {"from", tx.from},
                  {"value", tx.value_wei.to_hex()},
                  {"gas", hex(tx.gas_used)},
                  {"gasUsed", hex(tx.gas_used)},
                  {"gasPrice", tx.gas_price_wei.to_hex()},
                  {"input", tx.input_selector ? "0x" + *tx.input_selector : std::string("0x")}};
        t["to"] = tx.to.empty() ? json(nullptr) : json(tx.to);
        transactions.push_back(std::move(t));
    }
    return {{"number", hex(block.number)},
            {"timestamp", hex(static_cast<std::uint64_t>(block.timestamp))},
            {"miner", block.miner},
            {"size", hex(block.size_bytes)},
            {"difficulty", block.difficulty.to_hex()},
            {"gasLimit", hex(block.gas_limit)},
            {"gasUsed", hex(block.gas_used)},
            {"transactions", std::move(transactions)}};
}

BlockFetcher::BlockFetcher(const std::string& endpoint, std::uint64_t lo, std::uint64_t hi, RpcOptions options)
    : next_(lo), hi_(hi), done_(lo > hi), options_(options) {
    auto ep = split_endpoint(endpoint);
    client_ = std::make_unique<httplib::Client>(ep.scheme_host_port);
    if (!client_->is_valid()) throw ConfigError("rpc", "invalid endpoint " + endpoint);
    client_->set_connection_timeout(options_.timeout);
    client_->set_read_timeout(options_.timeout);
    path_ = ep.path;
}

BlockFetcher::~BlockFetcher() = default;
BlockFetcher::BlockFetcher(BlockFetcher&&) noexcept = default;
BlockFetcher& BlockFetcher::operator=(BlockFetcher&&) noexcept = default;

json BlockFetcher::call(std::uint64_t number) {
    auto backoff = options_.initial_backoff;
    int last_code = -1;
    std::string last_why;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        ++attempts_;
        auto res = client_->Post(path_, make_get_block_request(number, request_id_++), "application/json");
        bool transient = false;
        if (!res) {
            transient = true;
            last_code = -1;
            last_why = "connection failed: " + httplib::to_string(res.error());
        } else if (res->status >= 500 || res->status == 429) {
            transient = true;
            last_code = res->status;
            last_why = fmt::format("HTTP {}", res->status);
        } else if (res->status != 200) {
            throw RpcError(res->status, fmt::format("HTTP {}", res->status));
        } else {
            json body = json::parse(res->body, nullptr, false);
            if (body.is_discarded() || !body.is_object()) throw RpcError(-32700, "unparseable response");
            if (auto err = body.find("error"); err != body.end() && !err->is_null()) {
                int code = err->value("code", -32603);
                throw RpcError(code, err->value("message", std::string("error")));
            }
            auto result = body.find("result");
            if (result == body.end() || result->is_null()) throw RangeGap(number);
            return *result;
        }
        if (transient && attempt < options_.max_attempts) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, options_.max_backoff);
        }
    }
    throw RpcError(last_code, last_why + fmt::format(" (after {} attempts)", options_.max_attempts));
}

std::optional<BlockWithTransactions> BlockFetcher::next() {
    if (done_) return std::nullopt;
    auto out = decode_rpc_block(call(next_));
    if (out.block.number != next_) throw RpcError(-32602, fmt::format("asked for block {}, got {}", next_, out.block.number));
    if (next_ == hi_)
        done_ = true;
    else
        ++next_;
    return out;
}

BlockFetcher fetch_blocks_rpc(const std::string& endpoint, std::uint64_t lo, std::uint64_t hi, RpcOptions options) {
    return BlockFetcher(endpoint, lo, hi, options);
}

} // namespace chainsight::ingest
