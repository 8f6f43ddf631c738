#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chainsight/records.hpp"

namespace httplib {
class Client;
}

namespace chainsight::ingest {

struct RpcOptions {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{250};
    std::chrono::milliseconds max_backoff{4000};
    std::chrono::seconds timeout{30};
};

struct BlockWithTransactions {
    Block block;
    std::vector<Transaction> transactions;

    bool operator==(const BlockWithTransactions&) const = default;
};

// eth_getBlockByNumber(hex, true) request body.
std::string make_get_block_request(std::uint64_t number, std::uint64_t id);

// Maps an eth_getBlockByNumber result object onto our records. Transaction gas
// is taken from a per-transaction "gasUsed" when the node provides one, else
// from "gas".
BlockWithTransactions decode_rpc_block(const nlohmann::json& result);

// Inverse of decode_rpc_block; used to serve fixtures over JSON-RPC.
nlohmann::json encode_rpc_block(const Block& block, std::span<const Transaction> txs);

// Pulls blocks lo..hi (inclusive, in order) from an Ethereum JSON-RPC node.
// Connection failures, HTTP 5xx and 429 are retried with exponential backoff
// up to max_attempts; then RpcError. A null result is a RangeGap.
class BlockFetcher {
  public:
    BlockFetcher(const std::string& endpoint, std::uint64_t lo, std::uint64_t hi, RpcOptions options = {});
    ~BlockFetcher();
    BlockFetcher(BlockFetcher&&) noexcept;
    BlockFetcher& operator=(BlockFetcher&&) noexcept;

    std::optional<BlockWithTransactions> next();

    // Total HTTP attempts made so far, including retries.
    std::uint64_t attempts() const { return attempts_; }

  private:
    nlohmann::json call(std::uint64_t number);

    std::unique_ptr<httplib::Client> client_;
    std::string path_;
    std::uint64_t next_;
    std::uint64_t hi_;
    bool done_;
    RpcOptions options_;
    std::uint64_t attempts_ = 0;
    std::uint64_t request_id_ = 1;
};

BlockFetcher fetch_blocks_rpc(const std::string& endpoint, std::uint64_t lo, std::uint64_t hi, RpcOptions options = {});

} // namespace chainsight::ingest
