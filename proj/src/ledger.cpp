#include "chainsight/ledger.hpp"

#include <algorithm>

#include "chainsight/bytes.hpp"
#include "chainsight/errors.hpp"
#include "chainsight/hash.hpp"

namespace chainsight::ledger {

namespace {

void append_amount(std::string& out, const Amount& a) {
    bytes::append_le<std::uint64_t>(out, static_cast<std::uint64_t>(a.value));
    bytes::append_le<std::uint64_t>(out, static_cast<std::uint64_t>(a.value >> 64));
    out.push_back(a.saturated ? 1 : 0);
}

} // namespace

std::string LedgerSnapshot::digest() const {
    std::string buf;
    bytes::append_le<std::int64_t>(buf, tick_time);
    bytes::append_le<std::uint64_t>(buf, unique_accounts);
    for (const auto& [address, acc] : *accounts) {
        bytes::append_le<std::uint32_t>(buf, static_cast<std::uint32_t>(address.size()));
        buf += address;
        append_amount(buf, acc.balance);
        bytes::append_le<std::int64_t>(buf, acc.last_seen);
        append_amount(buf, acc.volume_in);
        append_amount(buf, acc.volume_out);
        bytes::append_le<std::uint64_t>(buf, acc.transaction_n);
        bytes::append_le<std::uint64_t>(buf, acc.erc20_n);
        buf.push_back(acc.is_contract ? 1 : 0);
    }
    return sha256_hex(buf);
}

Ledger::Ledger(LedgerConfig config) : config_(std::move(config)) {}

AccountState& Ledger::touch(const std::string& address, Timestamp timestamp) {
    auto [it, inserted] = accounts_.try_emplace(address);
    if (inserted) it->second.last_seen = timestamp;
    return it->second;
}

void Ledger::credit(AccountState& acc, Amount value) {
    Amount r = add_sat(acc.balance, value);
    if (r.saturated && !acc.balance.saturated) ++report_.saturation_events;
    acc.balance = r;
}

void Ledger::debit(AccountState& acc, const std::string& address, Amount value) {
    if (acc.balance.value >= value.value) {
        acc.balance.value -= value.value;
        return;
    }
    Amount shortfall{value.value - acc.balance.value};
    ++report_.clamp_events;
    report_.clamped_total = add_sat(report_.clamped_total, shortfall);
    if (report_.clamps.size() < ReplayReport::max_recorded_clamps)
        report_.clamps.push_back({current_block_, address, shortfall});
    acc.balance.value = 0;
}

void Ledger::apply_value_transfer(const std::string& from, const std::string& to, Amount value, Timestamp timestamp,
                                  bool is_erc20) {
    AccountState& sender = touch(from, timestamp);
    sender.last_seen = timestamp;
    sender.transaction_n += 1;
    active_.insert(from);
    if (to.empty()) return;

    AccountState& receiver = touch(to, timestamp);
    receiver.last_seen = timestamp;
    active_.insert(to);
    if (is_erc20) receiver.erc20_n += 1;
    if (&receiver != &sender) {
        receiver.transaction_n += 1;
        debit(sender, from, value);
        credit(receiver, value);
    }
    sender.volume_out = add_sat(sender.volume_out, value);
    receiver.volume_in = add_sat(receiver.volume_in, value);
}

BlockEffects Ledger::apply_block(const Block& block, std::span<const Transaction> txs, std::span<const Trace> traces) {
    if (last_block_ && block.number <= *last_block_) throw BlockOutOfOrder(block.number, *last_block_);
    current_block_ = block.number;
    BlockEffects effects;

    for (const auto& tx : txs) {
        if (!tx.to.empty() && is_contract(tx.to)) ++effects.dapp_operations;
        apply_value_transfer(tx.from, tx.to, tx.value_wei, block.timestamp, is_erc20(tx.input_selector));
        if (config_.debit_gas_fees && !block.miner.empty()) {
            Amount fee = mul_sat(Amount::from_u64(tx.gas_used), tx.gas_price_wei);
            debit(accounts_.at(tx.from), tx.from, fee);
            credit(touch(block.miner, block.timestamp), fee);
        }
    }
    for (const auto& tr : traces) {
        if (tr.kind == TraceKind::create) touch(tr.to, block.timestamp).is_contract = true;
        apply_value_transfer(tr.from, tr.to, tr.value_wei, block.timestamp, false);
    }
    if (config_.miner_reward.value != 0 && !block.miner.empty()) credit(touch(block.miner, block.timestamp), config_.miner_reward);

    last_block_ = block.number;
    return effects;
}

LedgerSnapshot Ledger::snapshot_at_tick(Timestamp tick_time) {
    LedgerSnapshot snap;
    snap.tick_time = tick_time;
    snap.accounts = std::make_shared<const AccountMap>(accounts_);
    snap.unique_accounts = accounts_.size();
    for (const auto& address : active_) {
        auto& acc = accounts_.at(address);
        acc.volume_in = {};
        acc.volume_out = {};
        acc.transaction_n = 0;
        acc.erc20_n = 0;
    }
    active_.clear();
    return snap;
}

bool Ledger::is_erc20(const std::optional<std::string>& selector) const {
    if (!selector) return false;
    return std::find(config_.erc20_selectors.begin(), config_.erc20_selectors.end(), *selector) !=
           config_.erc20_selectors.end();
}

bool Ledger::is_contract(const std::string& address) const {
    auto it = accounts_.find(address);
    return it != accounts_.end() && it->second.is_contract;
}

const AccountState* Ledger::find(const std::string& address) const {
    auto it = accounts_.find(address);
    return it == accounts_.end() ? nullptr : &it->second;
}

Amount Ledger::total_balance() const {
    Amount total;
    for (const auto& [_, acc] : accounts_) total = add_sat(total, acc.balance);
    return total;
}

} // namespace chainsight::ledger
