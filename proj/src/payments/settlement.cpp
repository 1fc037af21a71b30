#include "bandx/payments/settlement.hpp"

#include <charconv>
#include <fstream>
#include <mutex>
#include <sstream>

#include "bandx/common/error.hpp"
#include "bandx/credential/compliance.hpp"

namespace bandx::payments {

std::string_view to_string(AccountRole r) {
  switch (r) {
    case AccountRole::Payer: return "payer";
    case AccountRole::Merchant: return "merchant";
    case AccountRole::Csc: return "csc";
  }
  return "?";
}

namespace {

constexpr std::string_view kAccepted = "accepted";

std::string journal_bytes(const JournalEntry& e) {
  std::string rec = serialize_record(e.record);
  return "entry " + e.record_id + " " + (e.verdict ? "1" : "0") + " " + e.disposition + " " +
         std::to_string(rec.size()) + "\n" + rec + "\n";
}

}  // namespace

SettlementCenter::SettlementCenter(PublicKeyId csc_key, SettlementConfig config)
    : csc_key_(std::move(csc_key)), config_(std::move(config)) {
  if (config_.commission_bps < 0 || config_.commission_bps > 10000)
    throw Error(ErrorCode::ConfigError, "commission must be within 0..10000 basis points");
  roles_[csc_key_.str()] = AccountRole::Csc;
  trusted_.insert(config_.trusted_guarantors.begin(), config_.trusted_guarantors.end());
  if (config_.journal_path) replay_journal();
}

void SettlementCenter::trust_guarantor(const PublicKeyId& key) {
  std::unique_lock lock(mu_);
  trusted_.insert(key);
}

std::vector<PublicKeyId> SettlementCenter::trusted_guarantors() const {
  std::shared_lock lock(mu_);
  return {trusted_.begin(), trusted_.end()};
}

SettlementCenter::Verdict SettlementCenter::verify(const TransactionRecord& r,
                                                   const std::vector<PublicKeyId>& trusted) const {
  if (trusted.empty()) return {false, "UnknownGuarantor"};
  try {
    Credential policy = make_merchant_policy(r.merchant_key, trusted);
    if (verify_payment(policy, r.guarantor, r.offer, r.microcheck, r.action)) return {true, ""};
  } catch (const Error& e) {
    return {false, std::string(bandx::to_string(e.code()))};
  }
  bool known = !r.guarantor.authorizer.is_policy() &&
               std::find(trusted.begin(), trusted.end(), r.guarantor.authorizer.key_id()) != trusted.end();
  return {false, known ? "PaymentRefused" : "UnknownGuarantor"};
}

bool SettlementCenter::dispute_replay(const TransactionRecord& record) const {
  return verify(record, trusted_guarantors()).ok;
}

std::string SettlementCenter::apply(const JournalEntry& e, std::int64_t* commission) {
  *commission = 0;
  if (!e.verdict) return e.disposition.empty() ? "PaymentRefused" : e.disposition;
  MicrocheckView check;
  try {
    check = view_microcheck(e.record.microcheck);
  } catch (const Error&) {
    return "MalformedRecord";
  }
  const std::string payer = check.payer_key.str();
  if (settled_.count({payer, check.nonce})) return "DoubleDeposit";
  auto day_key = std::make_tuple(payer, check.amount.currency, check.date.str());
  if (config_.daily_cap_minor && daily_[day_key] + check.amount.minor > *config_.daily_cap_minor)
    return "DailyCapExceeded";

  std::int64_t fee = ceil_div(check.amount.minor * config_.commission_bps, 10000);
  const std::string& cur = check.amount.currency;
  const std::string merchant = e.record.merchant_key.str();
  balances_[{payer, cur}] -= check.amount.minor;
  balances_[{merchant, cur}] += check.amount.minor - fee;
  balances_[{csc_key_.str(), cur}] += fee;
  roles_.try_emplace(payer, AccountRole::Payer);
  roles_.try_emplace(merchant, AccountRole::Merchant);
  settled_.insert({payer, check.nonce});
  daily_[day_key] += check.amount.minor;
  *commission = fee;
  return std::string(kAccepted);
}

SettlementReport SettlementCenter::deposit_batch(std::span<const TransactionRecord> records) {
  std::unique_lock lock(mu_);
  std::vector<PublicKeyId> trusted(trusted_.begin(), trusted_.end());

  std::vector<Verdict> verdicts(records.size());
  kernels::evaluate(
      records.size(),
      [&](std::size_t i) {
        verdicts[i] = verify(records[i], trusted);
        return verdicts[i].ok;
      },
      config_.execution);

  SettlementReport report;
  std::vector<JournalEntry> batch;
  for (std::size_t i = 0; i < records.size(); ++i) {
    JournalEntry e{record_id(records[i]), verdicts[i].ok, verdicts[i].reason, records[i]};
    std::int64_t fee = 0;
    e.disposition = apply(e, &fee);
    if (e.disposition == kAccepted) {
      auto check = view_microcheck(e.record.microcheck);
      report.accepted.emplace_back(e.record_id, check.amount);
      report.commission_taken[check.amount.currency] += fee;
    } else {
      report.rejected.emplace_back(e.record_id, e.disposition);
    }
    batch.push_back(std::move(e));
  }
  append_journal(batch);
  for (auto& e : batch) {
    by_id_.try_emplace(e.record_id, entries_.size());
    entries_.push_back(std::move(e));
  }
  return report;
}

void SettlementCenter::append_journal(const std::vector<JournalEntry>& entries) {
  if (!config_.journal_path || entries.empty()) return;
  std::string bytes;
  for (const auto& e : entries) bytes += journal_bytes(e);
  std::ofstream out(*config_.journal_path, std::ios::binary | std::ios::app);
  out << bytes;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "cannot append to journal " + config_.journal_path->string());
}

void SettlementCenter::replay_journal() {
  const auto& path = *config_.journal_path;
  std::ifstream in(path, std::ios::binary);
  if (!in) return;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  std::size_t pos = 0, good = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    if (nl == std::string::npos) break;
    std::istringstream header(data.substr(pos, nl - pos));
    std::string tag, id, verdict, disposition;
    std::size_t len = 0;
    if (!(header >> tag >> id >> verdict >> disposition >> len) || tag != "entry") break;
    std::size_t body = nl + 1;
    if (body + len + 1 > data.size() || data[body + len] != '\n') break;
    JournalEntry e;
    try {
      e.record = parse_record(std::string_view(data).substr(body, len));
    } catch (const Error&) {
      break;
    }
    e.record_id = id;
    e.verdict = verdict == "1";
    std::int64_t fee = 0;
    std::string outcome = apply(e, &fee);
    // A journal is only ever written from the same state machine, so the
    // replayed outcome must agree with what was recorded.
    if ((outcome == kAccepted) != (disposition == kAccepted))
      throw Error(ErrorCode::IoError, "journal entry " + id + " does not replay to its recorded disposition");
    e.disposition = disposition;
    by_id_.try_emplace(e.record_id, entries_.size());
    entries_.push_back(std::move(e));
    pos = good = body + len + 1;
  }
  in.close();
  if (good < data.size()) std::filesystem::resize_file(path, good);
}

std::int64_t SettlementCenter::account_balance(const PublicKeyId& key, std::string_view currency) const {
  std::shared_lock lock(mu_);
  auto it = balances_.find({key.str(), std::string(currency)});
  return it == balances_.end() ? 0 : it->second;
}

std::vector<LedgerAccount> SettlementCenter::accounts() const {
  std::shared_lock lock(mu_);
  std::vector<LedgerAccount> out;
  for (const auto& [k, bal] : balances_) {
    auto role = roles_.find(k.first);
    out.push_back({*PublicKeyId::try_parse(k.first), k.second, bal,
                   role == roles_.end() ? AccountRole::Payer : role->second});
  }
  return out;
}

std::vector<JournalEntry> SettlementCenter::journal() const {
  std::shared_lock lock(mu_);
  return entries_;
}

std::optional<JournalEntry> SettlementCenter::find_entry(const std::string& record_id) const {
  std::shared_lock lock(mu_);
  auto it = by_id_.find(record_id);
  if (it == by_id_.end()) return std::nullopt;
  return entries_[it->second];
}

std::size_t SettlementCenter::settled_count() const {
  std::shared_lock lock(mu_);
  return settled_.size();
}

}  // namespace bandx::payments
