#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bandx/kernels/batch_verify.hpp"
#include "bandx/payments/instruments.hpp"
#include "bandx/payments/record.hpp"

namespace bandx::payments {

enum class AccountRole { Payer, Merchant, Csc };
std::string_view to_string(AccountRole r);

struct SettlementConfig {
  int commission_bps = 100;
  // Per payer, currency and check date; unset means unlimited.
  std::optional<std::int64_t> daily_cap_minor;
  // Append-only journal; replayed on construction when it exists.
  std::optional<std::filesystem::path> journal_path;
  kernels::Execution execution = kernels::Execution::Parallel;
  std::vector<PublicKeyId> trusted_guarantors;
};

struct SettlementReport {
  std::vector<std::pair<std::string, Money>> accepted;      // record-id, amount
  std::vector<std::pair<std::string, std::string>> rejected;  // record-id, reason
  std::map<std::string, std::int64_t> commission_taken;     // per currency
};

struct LedgerAccount {
  PublicKeyId principal;
  std::string currency;
  std::int64_t balance = 0;
  AccountRole role = AccountRole::Payer;
};

struct JournalEntry {
  std::string record_id;
  bool verdict = false;
  std::string disposition;  // "accepted" or the rejection reason
  TransactionRecord record;
};

// Clearing and settlement center. Deposits apply strictly in batch order
// under one writer; balance reads may run concurrently.
class SettlementCenter {
 public:
  explicit SettlementCenter(PublicKeyId csc_key, SettlementConfig config = {});

  const PublicKeyId& key() const { return csc_key_; }
  void trust_guarantor(const PublicKeyId& key);
  std::vector<PublicKeyId> trusted_guarantors() const;

  SettlementReport deposit_batch(std::span<const TransactionRecord> records);

  // Re-runs the payment check from the record alone.
  bool dispute_replay(const TransactionRecord& record) const;

  std::int64_t account_balance(const PublicKeyId& key, std::string_view currency) const;
  std::vector<LedgerAccount> accounts() const;
  std::vector<JournalEntry> journal() const;
  std::optional<JournalEntry> find_entry(const std::string& record_id) const;
  std::size_t settled_count() const;

 private:
  struct Verdict {
    bool ok = false;
    std::string reason;
  };
  Verdict verify(const TransactionRecord& r, const std::vector<PublicKeyId>& trusted) const;
  // Returns the commission, or the rejection reason.
  std::string apply(const JournalEntry& e, std::int64_t* commission);
  void replay_journal();
  void append_journal(const std::vector<JournalEntry>& entries);

  PublicKeyId csc_key_;
  SettlementConfig config_;
  mutable std::shared_mutex mu_;
  std::set<PublicKeyId> trusted_;
  std::map<std::pair<std::string, std::string>, std::int64_t> balances_;  // (key, currency)
  std::map<std::string, AccountRole> roles_;
  std::set<std::pair<std::string, std::string>> settled_;                  // (payer, nonce)
  std::map<std::tuple<std::string, std::string, std::string>, std::int64_t> daily_;  // payer, currency, date
  std::vector<JournalEntry> entries_;
  std::map<std::string, std::size_t> by_id_;
};

}  // namespace bandx::payments
