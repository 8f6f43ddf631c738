#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "chainsight/amount.hpp"
#include "chainsight/records.hpp"

namespace chainsight::ledger {

struct AccountState {
    Amount balance;
    Timestamp last_seen = 0;
    // Per-tick counters, zeroed by snapshot_at_tick.
    Amount volume_in;
    Amount volume_out;
    std::uint64_t transaction_n = 0;
    std::uint64_t erc20_n = 0;
    bool is_contract = false;

    bool operator==(const AccountState&) const = default;
};

using AccountMap = std::map<std::string, AccountState>;

// Immutable view of the ledger taken at a tick boundary. Copies share the
// frozen account map, so snapshots can be handed to parallel consumers.
struct LedgerSnapshot {
    Timestamp tick_time = 0;
    std::shared_ptr<const AccountMap> accounts = std::make_shared<const AccountMap>();
    std::uint64_t unique_accounts = 0;

    const AccountMap& account_map() const { return *accounts; }

    // SHA-256 over a canonical encoding of tick_time and every account.
    std::string digest() const;
};

struct LedgerConfig {
    Amount miner_reward{0};
    bool debit_gas_fees = false;
    std::vector<std::string> erc20_selectors{"a9059cbb", "23b872dd"};
};

struct ClampEvent {
    std::uint64_t block_number = 0;
    std::string address;
    Amount shortfall;
};

struct ReplayReport {
    std::uint64_t clamp_events = 0;
    Amount clamped_total;
    std::uint64_t saturation_events = 0;
    std::vector<ClampEvent> clamps; // first max_recorded_clamps events

    static constexpr std::size_t max_recorded_clamps = 10000;
};

struct BlockEffects {
    // Transactions whose receiver was a contract when applied.
    std::uint64_t dapp_operations = 0;
};

// Replays value transfers in chain order into per-account state.
class Ledger {
  public:
    explicit Ledger(LedgerConfig config = {});

    // from -> to. Sender balance is clamped at zero (recorded in the report);
    // the receiver is always credited the full value. An empty `to` records
    // sender activity only.
    void apply_value_transfer(const std::string& from, const std::string& to, Amount value, Timestamp timestamp,
                              bool is_erc20);

    // Transactions first, then traces. Throws BlockOutOfOrder unless the block
    // number is above the last applied one.
    BlockEffects apply_block(const Block& block, std::span<const Transaction> txs, std::span<const Trace> traces);

    // Freezes the current state under tick_time, then zeroes every per-tick
    // counter. Balance, last_seen and is_contract carry over.
    LedgerSnapshot snapshot_at_tick(Timestamp tick_time);

    bool is_erc20(const std::optional<std::string>& selector) const;
    bool is_contract(const std::string& address) const;
    const AccountMap& accounts() const { return accounts_; }
    const AccountState* find(const std::string& address) const;
    Amount total_balance() const;
    const ReplayReport& report() const { return report_; }
    std::optional<std::uint64_t> last_block() const { return last_block_; }
    const LedgerConfig& config() const { return config_; }

  private:
    AccountState& touch(const std::string& address, Timestamp timestamp);
    void credit(AccountState& acc, Amount value);
    void debit(AccountState& acc, const std::string& address, Amount value);

    LedgerConfig config_;
    AccountMap accounts_;
    std::set<std::string> active_; // accounts with non-zero counters this tick
    ReplayReport report_;
    std::optional<std::uint64_t> last_block_;
    std::uint64_t current_block_ = 0;
};

} // namespace chainsight::ledger
