// Copyright 2026 The paysec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Pseudonym-card payment flow: a provider issues VPINs standing in for
// card numbers, a nine-step transaction delivers goods before any charge,
// the customer confirms by Yes/No/Fraud, and settlement posts through a
// double-entry ledger.
//
// Step map: 1 order, 2-3 VPIN authorization, 4 delivery, 5 report,
// 6 confirmation query, 7 customer answer, 8a withdraw / 8b deposit,
// 9 interbank clearing. 8a, 8b and 9 post atomically. A Fraud answer
// revokes the VPIN for good; an unanswered query declines after a
// configurable number of ticks.
//
// Transcript lines: `fv txn=<id> step=<n> state=<name> ...`, ledger dump
// lines `account=<id> balance=<int>`.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "paysec/crypto.hpp"

namespace paysec::firstvirtual {

constexpr std::size_t kVpinLen = 16;
constexpr std::int64_t kDefaultLargeThreshold = 100000; // minor units
constexpr std::int64_t kDefaultConfirmTimeoutTicks = 10;

// ---------------------------------------------------------------------------
// Double-entry ledger

struct LedgerEntry {
    std::string debit;
    std::string credit;
    std::int64_t amount = 0;
    std::string txn_id;
    std::string tag; // "8a", "8b", "9"
};

class Ledger {
public:
    void open_account(const std::string& id, std::int64_t initial = 0) {
        if (balances_.count(id) != 0) throw InvalidParameter("account exists: " + id);
        balances_[id] = initial;
    }

    bool has_account(const std::string& id) const { return balances_.count(id) != 0; }

    std::int64_t balance(const std::string& id) const {
        auto it = balances_.find(id);
        if (it == balances_.end()) throw InvalidParameter("no such account: " + id);
        return it->second;
    }

    std::int64_t total() const {
        std::int64_t sum = 0;
        for (const auto& [id, bal] : balances_) sum += bal;
        return sum;
    }

    // All legs are validated before any is applied, so a bad leg anywhere
    // leaves balances and the entry log untouched.
    void post_atomic(const std::vector<LedgerEntry>& legs) {
        for (const LedgerEntry& leg : legs) {
            if (leg.amount <= 0) throw InvalidParameter("ledger amount must be positive");
            if (balances_.count(leg.debit) == 0)
                throw InvalidParameter("no such account: " + leg.debit);
            if (balances_.count(leg.credit) == 0)
                throw InvalidParameter("no such account: " + leg.credit);
        }
        for (const LedgerEntry& leg : legs) {
            balances_[leg.debit] -= leg.amount;
            balances_[leg.credit] += leg.amount;
            entries_.push_back(leg);
        }
    }

    const std::vector<LedgerEntry>& entries() const { return entries_; }

    std::vector<std::string> dump() const {
        std::vector<std::string> out;
        for (const auto& [id, bal] : balances_)
            out.push_back("account=" + id + " balance=" + std::to_string(bal));
        return out;
    }

private:
    std::map<std::string, std::int64_t> balances_;
    std::vector<LedgerEntry> entries_;
};

// ---------------------------------------------------------------------------
// Provider: VPIN issuance, blacklist, authorization signatures

enum class VpinStatus { Active, Revoked };

struct Vpin {
    std::string value; // 16 alphanumeric chars; the pseudonym
    std::string holder;
    VpinStatus status = VpinStatus::Active;
};

class FvProvider {
public:
    FvProvider(std::string id, crypto::RsaKeyPair keys)
        : id_(std::move(id)), keys_(std::move(keys)) {}

    const std::string& id() const { return id_; }
    crypto::RsaPublicKey public_key() const { return keys_.public_key(); }

    void register_customer(const std::string& customer) { registered_.insert(customer); }

    // The PAN stays inside the provider; callers only ever see the pseudonym.
    Vpin issue_vpin(const std::string& customer, const std::string& pan, Rng& rng) {
        if (registered_.count(customer) == 0)
            throw StateError("not-registered: " + customer);
        static const char charset[] =
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
        std::string value;
        do {
            value.clear();
            for (std::size_t i = 0; i < kVpinLen; ++i)
                value += charset[rng.below(sizeof(charset) - 1)];
        } while (vpins_.count(value) != 0 || value.find(pan) != std::string::npos);
        vpins_[value] = Vpin{value, customer, VpinStatus::Active};
        card_refs_[value] = pan;
        return vpins_[value];
    }

    bool authorize_vpin(const std::string& value) const {
        auto it = vpins_.find(value);
        return it != vpins_.end() && it->second.status == VpinStatus::Active;
    }

    // Revocation is permanent; there is no path back to Active.
    void revoke(const std::string& value) {
        auto it = vpins_.find(value);
        if (it != vpins_.end()) it->second.status = VpinStatus::Revoked;
        blacklist_.insert(value);
    }

    bool blacklist_contains(const std::string& value) const {
        return blacklist_.count(value) != 0;
    }

    BigInt sign_authorization(const std::string& txn_id, const std::string& vpin,
                              std::int64_t amount, bool approved) const {
        return crypto::sign(keys_, authorization_message(txn_id, vpin, amount, approved));
    }

    static Bytes authorization_message(const std::string& txn_id, const std::string& vpin,
                                       std::int64_t amount, bool approved) {
        return Encoder()
            .str(txn_id)
            .str(vpin)
            .i64(amount)
            .str(approved ? "approved" : "declined")
            .take();
    }

private:
    std::string id_;
    crypto::RsaKeyPair keys_;
    std::set<std::string> registered_;
    std::map<std::string, Vpin> vpins_;
    std::map<std::string, std::string> card_refs_; // vpin -> PAN, never exposed
    std::set<std::string> blacklist_;
};

// Above the threshold the authorization must carry a provider signature.
struct VpinAuthorization {
    bool approved = false;
    std::optional<BigInt> signature;
};

inline bool merchant_verify_authorization(const crypto::RsaPublicKey& provider_key,
                                          const std::string& txn_id,
                                          const std::string& vpin, std::int64_t amount,
                                          const VpinAuthorization& auth,
                                          std::int64_t large_threshold) {
    if (amount <= large_threshold) return true;
    if (!auth.signature) return false;
    return crypto::verify(
        provider_key,
        FvProvider::authorization_message(txn_id, vpin, amount, auth.approved),
        *auth.signature);
}

// ---------------------------------------------------------------------------
// Transaction state machine

enum class TxnState {
    Ordered,
    VpinChecked,
    Delivered,
    Reported,
    AwaitingConfirm,
    Settled,
    Declined,
    FraudAborted,
};

inline const char* to_string(TxnState s) {
    switch (s) {
    case TxnState::Ordered: return "ordered";
    case TxnState::VpinChecked: return "vpinchecked";
    case TxnState::Delivered: return "delivered";
    case TxnState::Reported: return "reported";
    case TxnState::AwaitingConfirm: return "awaitingconfirm";
    case TxnState::Settled: return "settled";
    case TxnState::Declined: return "declined";
    case TxnState::FraudAborted: return "fraudaborted";
    }
    return "unknown";
}

enum class ConfirmAnswer { Yes, No, Fraud };

inline const char* to_string(ConfirmAnswer a) {
    switch (a) {
    case ConfirmAnswer::Yes: return "yes";
    case ConfirmAnswer::No: return "no";
    case ConfirmAnswer::Fraud: return "fraud";
    }
    return "unknown";
}

struct FvTransaction {
    std::string id;
    std::string customer;
    std::string merchant;
    std::string vpin;
    std::int64_t amount = 0;
    TxnState state = TxnState::Ordered;
    std::int64_t confirm_asked_tick = -1;
};

struct FvConfig {
    std::int64_t large_threshold = kDefaultLargeThreshold;
    std::int64_t confirm_timeout_ticks = kDefaultConfirmTimeoutTicks;
    std::string bank_customer = "bank-c";
    std::string bank_merchant = "bank-m";
};

// Drives transactions through the nine steps against one provider and one
// ledger, recording a transcript line per step.
class FvFlow {
public:
    FvFlow(FvProvider& provider, Ledger& ledger, FvConfig config = {})
        : provider_(provider), ledger_(ledger), config_(std::move(config)) {
        if (!ledger_.has_account(config_.bank_customer))
            ledger_.open_account(config_.bank_customer);
        if (!ledger_.has_account(config_.bank_merchant))
            ledger_.open_account(config_.bank_merchant);
    }

    // Step 1. The merchant cannot judge the VPIN yet.
    FvTransaction& step_order(const std::string& txn_id, const std::string& customer,
                              const std::string& merchant, const std::string& vpin,
                              std::int64_t amount) {
        if (txns_.count(txn_id) != 0)
            throw InvalidParameter("duplicate transaction id: " + txn_id);
        if (amount <= 0) throw InvalidParameter("order amount must be positive");
        FvTransaction txn{txn_id, customer, merchant, vpin, amount};
        auto [it, inserted] = txns_.emplace(txn_id, std::move(txn));
        line(it->second, "1", "state=" + std::string(to_string(TxnState::Ordered)) +
                                  " customer=" + customer + " merchant=" + merchant +
                                  " amount=" + std::to_string(amount));
        return it->second;
    }

    // Steps 2-3.
    VpinAuthorization step_authorize_vpin(const std::string& txn_id) {
        FvTransaction& txn = get(txn_id, TxnState::Ordered, "authorize");
        VpinAuthorization auth;
        auth.approved = provider_.authorize_vpin(txn.vpin);
        if (txn.amount > config_.large_threshold)
            auth.signature = provider_.sign_authorization(txn.id, txn.vpin, txn.amount,
                                                          auth.approved);
        if (auth.approved) {
            txn.state = TxnState::VpinChecked;
            line(txn, "3", "state=vpinchecked");
        } else {
            txn.state = TxnState::Declined;
            line(txn, "3", "state=declined reason=vpin-invalid");
        }
        return auth;
    }

    // Steps 4-5: goods move before any money does.
    void step_deliver_and_report(const std::string& txn_id) {
        FvTransaction& txn = get(txn_id, TxnState::VpinChecked, "deliver");
        txn.state = TxnState::Delivered;
        line(txn, "4", "state=delivered");
        txn.state = TxnState::Reported;
        line(txn, "5", "state=reported amount=" + std::to_string(txn.amount));
    }

    // Step 6.
    void ask_confirmation(const std::string& txn_id, std::int64_t tick) {
        FvTransaction& txn = get(txn_id, TxnState::Reported, "confirm-query");
        txn.state = TxnState::AwaitingConfirm;
        txn.confirm_asked_tick = tick;
        line(txn, "6", "state=awaitingconfirm");
    }

    // Steps 7-9.
    TxnState answer_confirmation(const std::string& txn_id, ConfirmAnswer answer,
                                 std::int64_t tick) {
        FvTransaction& txn = get(txn_id, TxnState::AwaitingConfirm, "confirm-answer");
        if (tick - txn.confirm_asked_tick > config_.confirm_timeout_ticks)
            return decline_timeout(txn);
        line(txn, "7", "answer=" + std::string(to_string(answer)));
        switch (answer) {
        case ConfirmAnswer::Yes: {
            ledger_.post_atomic({
                {txn.customer, config_.bank_customer, txn.amount, txn.id, "8a"},
                {config_.bank_merchant, txn.merchant, txn.amount, txn.id, "8b"},
                {config_.bank_customer, config_.bank_merchant, txn.amount, txn.id, "9"},
            });
            line(txn, "8a", "debit=" + txn.customer + " credit=" + config_.bank_customer +
                                " amount=" + std::to_string(txn.amount));
            line(txn, "8b", "debit=" + config_.bank_merchant + " credit=" + txn.merchant +
                                " amount=" + std::to_string(txn.amount));
            line(txn, "9", "debit=" + config_.bank_customer +
                               " credit=" + config_.bank_merchant +
                               " amount=" + std::to_string(txn.amount));
            txn.state = TxnState::Settled;
            line(txn, "9", "state=settled");
            break;
        }
        case ConfirmAnswer::No:
            txn.state = TxnState::Declined;
            line(txn, "7", "state=declined reason=customer-no");
            break;
        case ConfirmAnswer::Fraud:
            provider_.revoke(txn.vpin);
            txn.state = TxnState::FraudAborted;
            line(txn, "7", "state=fraudaborted vpin-revoked=" + txn.vpin);
            break;
        }
        return txn.state;
    }

    // Declines a query left unanswered past the timeout; no-op otherwise.
    TxnState check_timeout(const std::string& txn_id, std::int64_t tick) {
        FvTransaction& txn = find(txn_id);
        if (txn.state == TxnState::AwaitingConfirm &&
            tick - txn.confirm_asked_tick >= config_.confirm_timeout_ticks)
            return decline_timeout(txn);
        return txn.state;
    }

    const FvTransaction& txn(const std::string& txn_id) const {
        auto it = txns_.find(txn_id);
        if (it == txns_.end()) throw InvalidParameter("no such transaction: " + txn_id);
        return it->second;
    }

    const std::vector<std::string>& transcript() const { return transcript_; }
    const FvConfig& config() const { return config_; }

private:
    FvTransaction& find(const std::string& txn_id) {
        auto it = txns_.find(txn_id);
        if (it == txns_.end()) throw InvalidParameter("no such transaction: " + txn_id);
        return it->second;
    }

    FvTransaction& get(const std::string& txn_id, TxnState expected, const char* op) {
        FvTransaction& txn = find(txn_id);
        if (txn.state != expected)
            throw StateError(std::string(op) + ": transaction " + txn_id + " is in state " +
                             to_string(txn.state));
        return txn;
    }

    TxnState decline_timeout(FvTransaction& txn) {
        txn.state = TxnState::Declined;
        line(txn, "7", "state=declined reason=confirm-timeout");
        return txn.state;
    }

    void line(const FvTransaction& txn, const char* step, const std::string& rest) {
        transcript_.push_back("fv txn=" + txn.id + " step=" + step + " " + rest);
    }

    FvProvider& provider_;
    Ledger& ledger_;
    FvConfig config_;
    std::map<std::string, FvTransaction> txns_;
    std::vector<std::string> transcript_;
};

} // namespace paysec::firstvirtual
