#include "bandx/harness/scenario.hpp"

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "bandx/common/error.hpp"
#include "bandx/harness/codec.hpp"
#include "bandx/harness/qna.hpp"
#include "bandx/harness/service.hpp"

namespace bandx::harness {
namespace {

struct VerbSpec {
  std::size_t positional;
  std::set<std::string> options;
  std::set<std::string> flags;
  bool setup = false;
};

const std::map<std::string, VerbSpec>& verbs() {
  static const std::map<std::string, VerbSpec> v{
      {"seed", {1, {}, {}, true}},
      {"clock", {1, {}, {}, true}},
      {"topology", {1, {}, {}, true}},
      {"guarantor", {1, {}, {}, true}},
      {"customer", {1, {"guarantor", "limit", "expires"}, {}, true}},
      {"config", {2, {}, {}, true}},
      {"post-offer", {5, {"expires", "hint", "currency"}, {"fixed", "premium"}}},
      {"advance", {1, {}, {}}},
      {"advance-to", {1, {}, {}}},
      {"buy-spot", {5, {"as", "max-price"}, {}}},
      {"buy-future", {4, {"at", "for", "as", "max-price"}, {}}},
      {"activate", {1, {}, {}}},
      {"keepalive", {1, {}, {}}},
      {"teardown", {1, {}, {}}},
      {"deposit", {0, {}, {}}},
      {"expire", {0, {}, {}}},
      {"dispute-all", {0, {}, {}}},
  };
  return v;
}

const std::set<std::string> kOps{"==", "!=", "<", "<=", ">", ">="};

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::ScenarioParseError, "line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_int(int line, const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  parse_fail(line, what + " \"" + s + "\" is not an integer");
}

std::int64_t parse_amount(int line, const std::string& s) {
  auto m = parse_minor_units(s);
  if (!m) parse_fail(line, "bad amount \"" + s + "\"");
  return *m;
}

SimTime parse_time(int line, const std::string& s) {
  auto t = try_parse_time(s);
  if (!t) parse_fail(line, "bad time \"" + s + "\"");
  return *t;
}

Date parse_date(int line, const std::string& s) {
  auto d = Date::try_parse(s);
  if (!d) parse_fail(line, "bad date \"" + s + "\"");
  return *d;
}

void check_assert(const Event& e) {
  const auto& a = e.args;
  if (a.empty()) parse_fail(e.line, "assert needs a subject");
  const std::map<std::string, std::size_t> arity{{"balance", 4}, {"load", 4}, {"state", 4}, {"last-error", 3},
                                                 {"active", 3}};
  auto it = arity.find(a[0]);
  if (it == arity.end()) parse_fail(e.line, "unknown assert subject " + a[0]);
  if (a.size() != it->second && !(a[0] == "balance" && a.size() == 5))
    parse_fail(e.line, "wrong number of words for assert " + a[0]);
  const std::string& op = a[it->second - 2];
  if (!kOps.count(op)) parse_fail(e.line, "unknown operator " + op);
  const std::string& value = a[it->second - 1];
  if (a[0] == "balance") parse_amount(e.line, value);
  if (a[0] == "load" || a[0] == "active") parse_int(e.line, value, "value");
}

template <typename T>
bool compare(const T& lhs, const std::string& op, const T& rhs) {
  if (op == "==") return lhs == rhs;
  if (op == "!=") return lhs != rhs;
  if (op == "<") return lhs < rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == ">") return lhs > rhs;
  return lhs >= rhs;
}

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  Scenario s;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  std::set<std::string> guarantors;
  std::set<std::string> handles;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::vector<std::string> w;
    for (std::string t; ls >> t;) w.push_back(t);
    if (w.empty()) continue;

    Event e;
    e.line = lineno;
    e.verb = w[0];
    if (e.verb == "assert") {
      e.args.assign(w.begin() + 1, w.end());
      check_assert(e);
      s.events.push_back(std::move(e));
      continue;
    }
    auto spec = verbs().find(e.verb);
    if (spec == verbs().end()) parse_fail(lineno, "unknown directive " + e.verb);
    std::size_t i = 1;
    for (; i < w.size() && e.args.size() < spec->second.positional; ++i) e.args.push_back(w[i]);
    if (e.args.size() < spec->second.positional)
      parse_fail(lineno, e.verb + " needs " + std::to_string(spec->second.positional) + " arguments");
    for (; i < w.size(); ++i) {
      if (spec->second.flags.count(w[i])) {
        e.flags.push_back(w[i]);
      } else if (spec->second.options.count(w[i])) {
        if (i + 1 >= w.size()) parse_fail(lineno, "option " + w[i] + " needs a value");
        e.options[w[i]] = w[i + 1];
        ++i;
      } else {
        parse_fail(lineno, "unexpected \"" + w[i] + "\" after " + e.verb);
      }
    }

    if (spec->second.setup) {
      if (!s.events.empty()) parse_fail(lineno, e.verb + " must come before the first event");
      auto& st = s.setup;
      const auto& a = e.args;
      if (e.verb == "seed") {
        st.seed = static_cast<std::uint64_t>(parse_int(lineno, a[0], "seed"));
      } else if (e.verb == "clock") {
        st.clock = parse_time(lineno, a[0]);
        s.clock_set = true;
      } else if (e.verb == "topology") {
        st.topology_path = base_dir / a[0];
        try {
          st.topology_text = read_text(st.topology_path);
          isp::parse_topology(st.topology_text);
        } catch (const Error& err) {
          parse_fail(lineno, err.what());
        }
      } else if (e.verb == "guarantor") {
        if (!guarantors.insert(a[0]).second) parse_fail(lineno, "duplicate guarantor " + a[0]);
        st.guarantors.push_back(a[0]);
      } else if (e.verb == "customer") {
        CustomerSpec c;
        c.name = a[0];
        if (!e.options.count("guarantor")) parse_fail(lineno, "customer needs a guarantor");
        c.guarantor = e.options["guarantor"];
        if (!guarantors.count(c.guarantor)) parse_fail(lineno, "unknown guarantor " + c.guarantor);
        if (e.options.count("limit")) c.limit.minor = parse_amount(lineno, e.options["limit"]);
        if (e.options.count("expires")) c.expiry = parse_date(lineno, e.options["expires"]);
        for (const auto& other : st.customers)
          if (other.name == c.name) parse_fail(lineno, "duplicate customer " + c.name);
        st.customers.push_back(c);
      } else if (e.verb == "config") {
        const auto& k = a[0];
        if (k == "commission-bps") st.commission_bps = static_cast<int>(parse_int(lineno, a[1], k));
        else if (k == "daily-cap") st.daily_cap_minor = parse_amount(lineno, a[1]);
        else if (k == "keepalive-period") st.keepalive_period_seconds = parse_int(lineno, a[1], k);
        else if (k == "challenge-ttl") st.challenge_ttl_seconds = parse_int(lineno, a[1], k);
        else parse_fail(lineno, "unknown config key " + k);
      }
      continue;
    }

    // Event argument checks, so a bad scenario fails before any message is sent.
    const auto& a = e.args;
    if (e.verb == "post-offer") {
      parse_int(lineno, a[3], "bandwidth");
      parse_amount(lineno, a[4]);
      if (e.options.count("expires")) parse_date(lineno, e.options["expires"]);
    } else if (e.verb == "advance") {
      if (parse_int(lineno, a[0], "seconds") < 0) parse_fail(lineno, "the clock only moves forward");
    } else if (e.verb == "advance-to") {
      parse_time(lineno, a[0]);
    } else if (e.verb == "buy-spot" || e.verb == "buy-future") {
      bool known = false;
      for (const auto& c : s.setup.customers) known = known || c.name == a[0];
      if (!known) parse_fail(lineno, "unknown customer " + a[0]);
      parse_int(lineno, a[3], "bandwidth");
      if (e.verb == "buy-spot") parse_int(lineno, a[4], "duration");
      if (e.options.count("max-price")) parse_amount(lineno, e.options["max-price"]);
      if (e.verb == "buy-future") {
        for (const char* req : {"at", "for", "as"})
          if (!e.options.count(req)) parse_fail(lineno, std::string("buy-future needs \"") + req + "\"");
        const auto& at = e.options["at"];
        if (at.front() == '+') parse_int(lineno, at.substr(1), "offset");
        else parse_time(lineno, at);
        parse_int(lineno, e.options["for"], "duration");
      }
      if (e.options.count("as")) handles.insert(e.options["as"]);
    } else if (e.verb == "activate" || e.verb == "keepalive" || e.verb == "teardown") {
      if (!handles.count(a[0])) parse_fail(lineno, "unknown handle " + a[0]);
    }
    s.events.push_back(std::move(e));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  Scenario s = parse_scenario(read_text(path), path.parent_path());
  s.path = path;
  return s;
}

namespace {

class Runner {
 public:
  Runner(const Scenario& s, Transport& t) : s_(s), recorded_(t, &transcript_), quiet_(t) {
    topology_ = isp::parse_topology(s.setup.topology_text);
    for (const auto& n : topology_.isps) name_key("isp:" + n, n);
    for (const auto& g : s.setup.guarantors) name_key("guarantor:" + g, g);
    for (const auto& c : s.setup.customers) name_key("customer:" + c.name, c.name);
    name_key("csc", "csc");
    now_ = s.setup.clock;
  }

  RunResult run() {
    RunResult r;
    try {
      if (s_.clock_set) set_clock();
      for (const auto& c : s_.setup.customers) {
        Payload p;
        p.set("guarantor", c.guarantor);
        p.set("payer", s_.setup.key_for("customer:" + c.name).id().str());
        p.set("limit", c.limit.amount_str());
        p.set("currency", c.limit.currency);
        p.set("expiry", c.expiry.str());
        auto cwc = get_credential(recorded_.call("guarantor", "qna:" + c.name, "ISSUE-CWC", std::move(p)).payload,
                                  "credential");
        qnas_[c.name] = std::make_unique<QnaSession>(c.name, s_.setup.key_for("customer:" + c.name), cwc,
                                                     crypto::make_random(s_.setup.seed, "qna:" + c.name), recorded_,
                                                     topology_, isps_by_key_);
      }
      for (std::size_t i = 0; i < s_.events.size(); ++i) {
        const Event& e = s_.events[i];
        if (e.verb == "assert") {
          std::string why;
          if (!check(e, why)) {
            r.exit_code = 2;
            r.message = "assertion failed at event " + std::to_string(i + 1) + " (line " + std::to_string(e.line) +
                        "): " + why;
            break;
          }
          continue;
        }
        try {
          apply(e);
          last_error_ = "none";
        } catch (const Error& err) {
          if (err.code() == ErrorCode::AssertionFailed) {
            r.exit_code = 2;
            r.message = "assertion failed at event " + std::to_string(i + 1) + " (line " + std::to_string(e.line) +
                        "): " + err.what();
            break;
          }
          if (err.code() == ErrorCode::ProtocolError || err.code() == ErrorCode::IoError ||
              err.code() == ErrorCode::ConfigError || err.code() == ErrorCode::ScenarioParseError)
            throw;
          last_error_ = std::string(to_string(err.code()));
        }
      }
    } catch (const Error& err) {
      r.exit_code = 3;
      r.message = err.what();
    }
    r.transcript = transcript_;
    try {
      r.report = report();
    } catch (const Error& err) {
      if (r.exit_code == 0) r.exit_code = 3, r.message = err.what();
    }
    return r;
  }

 private:
  void name_key(const std::string& principal, const std::string& name) {
    auto id = s_.setup.key_for(principal).id().str();
    names_[id] = name;
    keys_[name] = id;
    if (principal.rfind("isp:", 0) == 0) isps_by_key_[id] = name;
  }

  void set_clock() {
    for (const auto& role : all_roles()) {
      Payload p;
      p.set("now", now_.seconds);
      recorded_.call(role, "runner", "CLOCK-SET", std::move(p));
    }
  }

  market::OfferQuery query(const Event& e) const {
    market::OfferQuery q;
    q.from = e.args[1];
    q.to = e.args[2];
    q.min_bandwidth_mbps = std::stoll(e.args[3]);
    q.needed_on = date_of(now_);
    if (auto it = e.options.find("max-price"); it != e.options.end())
      q.max_total_price = Money{*parse_minor_units(it->second), "USD"};
    return q;
  }

  PurchaseHandle& handle(const std::string& name) {
    auto it = handles_.find(name);
    if (it == handles_.end()) throw Error(ErrorCode::BadRequest, "handle " + name + " was never established");
    return it->second;
  }

  void apply(const Event& e) {
    const auto& a = e.args;
    if (e.verb == "post-offer") {
      Payload p;
      p.set("isp", a[0]);
      p.set("from", a[1]);
      p.set("to", a[2]);
      p.set("bandwidth", a[3]);
      p.set("price", a[4]);
      p.set("currency", e.options.count("currency") ? e.options.at("currency") : "USD");
      p.set("expires", e.options.count("expires") ? e.options.at("expires") : date_of(now_).plus_days(30).str());
      p.set("unbundling", std::count(e.flags.begin(), e.flags.end(), "fixed") ? "false" : "true");
      if (std::count(e.flags.begin(), e.flags.end(), "premium")) p.set("qos_class", "premium_best_effort");
      if (e.options.count("hint")) p.set("path_hint", e.options.at("hint"));
      auto cred = recorded_.call("isp", "operator:" + a[0], "ISSUE-OFFER", std::move(p)).payload.block("credential");
      Payload post;
      post.add_block("offer", cred);
      recorded_.call("clearinghouse", "isp:" + a[0], "POST-OFFER", std::move(post));
    } else if (e.verb == "advance") {
      now_ = now_.plus(std::stoll(a[0]));
      set_clock();
    } else if (e.verb == "advance-to") {
      SimTime t = *try_parse_time(a[0]);
      if (t < now_) throw Error(ErrorCode::ScenarioParseError, "line " + std::to_string(e.line) + ": clock moves backward");
      now_ = t;
      set_clock();
    } else if (e.verb == "buy-spot") {
      auto h = qnas_.at(a[0])->purchase_spot(query(e), std::stoll(a[4]), now_);
      if (e.options.count("as")) handles_[e.options.at("as")] = std::move(h);
    } else if (e.verb == "buy-future") {
      const auto& at = e.options.at("at");
      SimTime start = at.front() == '+' ? now_.plus(std::stoll(at.substr(1))) : *try_parse_time(at);
      isp::Interval iv{start, start.plus(std::stoll(e.options.at("for")))};
      handles_[e.options.at("as")] = qnas_.at(a[0])->purchase_future(query(e), iv, now_);
      owner_[e.options.at("as")] = a[0];
    } else if (e.verb == "activate") {
      qna_for(a[0]).activate(handle(a[0]), now_);
    } else if (e.verb == "keepalive") {
      qna_for(a[0]).keepalive(handle(a[0]), now_);
    } else if (e.verb == "teardown") {
      qna_for(a[0]).teardown(handle(a[0]));
    } else if (e.verb == "deposit") {
      auto reply = recorded_.call("isp", "runner", "DEPOSIT-FLUSH", {});
      for (const auto& [k, v] : reply.payload.fields())
        if (k.find(".accepted.") != std::string::npos || k.find(".rejected.") != std::string::npos)
          record_ids_.push_back(v.substr(0, v.find(' ')));
    } else if (e.verb == "expire") {
      recorded_.call("isp", "runner", "EXPIRE", {});
      recorded_.call("clearinghouse", "runner", "EXPIRE", {});
    } else if (e.verb == "dispute-all") {
      for (const auto& id : record_ids_) {
        Payload p;
        p.set("record_id", id);
        auto reply = recorded_.call("csc", "runner", "DISPUTE", std::move(p));
        if (reply.payload.find("recorded") != reply.payload.get("verdict"))
          throw Error(ErrorCode::AssertionFailed, "dispute replay of " + id + " disagrees with the recorded verdict");
      }
    }
  }

  QnaSession& qna_for(const std::string& handle_name) {
    handle(handle_name);
    auto it = owner_.find(handle_name);
    if (it != owner_.end()) return *qnas_.at(it->second);
    for (const auto& e : s_.events)
      if (e.verb == "buy-spot" && e.options.count("as") && e.options.at("as") == handle_name) return *qnas_.at(e.args[0]);
    throw Error(ErrorCode::BadRequest, "no owner for handle " + handle_name);
  }

  std::map<std::string, std::string> isp_state() {
    auto rep = quiet_.call("isp", "runner", "REPORT", {}).payload;
    return {rep.fields().begin(), rep.fields().end()};
  }

  bool check(const Event& e, std::string& why) {
    const auto& a = e.args;
    const std::string& subject = a[0];
    if (subject == "balance") {
      std::string currency = a.size() == 5 ? a[4] : "USD";
      auto key = keys_.find(a[1]);
      if (key == keys_.end()) throw Error(ErrorCode::ScenarioParseError, "unknown principal " + a[1]);
      Payload p;
      p.set("key", key->second);
      p.set("currency", currency);
      auto got = *parse_minor_units(quiet_.call("csc", "runner", "BALANCE", std::move(p)).payload.get("balance"));
      auto want = *parse_minor_units(a[3]);
      why = "balance " + a[1] + " is " + format_minor_units(got) + ", expected " + a[2] + " " + a[3];
      return compare(got, a[2], want);
    }
    if (subject == "load") {
      auto st = isp_state();
      auto it = st.find("load." + a[1]);
      if (it == st.end()) throw Error(ErrorCode::ScenarioParseError, "unknown link " + a[1]);
      std::int64_t got = std::stoll(it->second.substr(0, it->second.find('/')));
      why = "load on " + a[1] + " is " + std::to_string(got) + ", expected " + a[2] + " " + a[3];
      return compare(got, a[2], static_cast<std::int64_t>(std::stoll(a[3])));
    }
    if (subject == "state") {
      auto st = isp_state();
      auto it = handles_.find(a[1]);
      if (it == handles_.end()) {
        why = "handle " + a[1] + " was never established";
        return false;
      }
      for (const auto& leg : it->second.legs) {
        auto r = st.find("reservation." + leg.isp + "." + leg.reservation_id);
        std::string state = r == st.end() ? "missing" : r->second.substr(0, r->second.find(' '));
        why = leg.reservation_id + " is " + state + ", expected " + a[2] + " " + a[3];
        if (!compare(state, a[2], a[3])) return false;
      }
      return true;
    }
    if (subject == "last-error") {
      why = "last error is " + last_error_ + ", expected " + a[1] + " " + a[2];
      return compare(last_error_, a[1], a[2]);
    }
    if (subject == "active") {
      std::int64_t n = 0;
      for (const auto& [k, v] : isp_state())
        if (k.rfind("reservation.", 0) == 0 && v.rfind("active ", 0) == 0) ++n;
      why = std::to_string(n) + " active reservations, expected " + a[1] + " " + a[2];
      return compare(n, a[1], static_cast<std::int64_t>(std::stoll(a[2])));
    }
    return false;
  }

  std::string name_of(const std::string& key) const {
    auto it = names_.find(key);
    return it == names_.end() ? key : it->second;
  }

  std::string report() {
    std::string out = "clock " + format_time(now_) + "\n";
    out += "[balances]\n";
    auto csc = quiet_.call("csc", "runner", "REPORT", {}).payload;
    std::vector<std::string> lines;
    for (std::int64_t i = 0; i < csc.get_int("accounts"); ++i) {
      std::istringstream f(csc.get("account." + std::to_string(i)));
      std::string key, currency, balance, role;
      f >> key >> currency >> balance >> role;
      lines.push_back(name_of(key) + " " + currency + " " + balance + " " + role);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) out += l + "\n";
    out += "settled " + csc.get("settled") + "\n";
    out += "[reservations]\n";
    auto st = isp_state();
    for (const auto& [k, v] : st)
      if (k.rfind("reservation.", 0) == 0) out += k.substr(12) + " " + v + "\n";
    out += "[links]\n";
    for (const auto& [k, v] : st)
      if (k.rfind("load.", 0) == 0) out += k.substr(5) + " " + v + "\n";
    out += "[deposits]\n";
    for (const auto& [k, v] : st)
      if (k.rfind("pending_deposits.", 0) == 0) out += k.substr(17) + " pending " + v + "\n";
    out += "audit " + st["audit"] + "\n";
    auto ch = quiet_.call("clearinghouse", "runner", "REPORT", {}).payload;
    out += "[offers]\ncount " + ch.get("offers") + "\n";
    std::vector<std::string> offers;
    for (const auto& [k, v] : ch.fields())
      if (k.rfind("offer.", 0) == 0) offers.push_back(v);
    std::sort(offers.begin(), offers.end());
    for (const auto& o : offers) out += o + "\n";
    return out;
  }

  const Scenario& s_;
  std::string transcript_;
  Client recorded_;
  Client quiet_;
  isp::Topology topology_;
  SimTime now_;
  std::map<std::string, std::string> names_;  // key -> name
  std::map<std::string, std::string> keys_;   // name -> key
  std::map<std::string, std::string> isps_by_key_;
  std::map<std::string, std::unique_ptr<QnaSession>> qnas_;
  std::map<std::string, PurchaseHandle> handles_;
  std::map<std::string, std::string> owner_;
  std::vector<std::string> record_ids_;
  std::string last_error_ = "none";
};

}  // namespace

RunResult run_scenario(const Scenario& s, Transport& transport) { return Runner(s, transport).run(); }

RunResult run_scenario_in_process(const Scenario& s) {
  InProcessTransport t;
  std::map<std::string, std::unique_ptr<Service>> services;
  for (const auto& role : all_roles()) services[role] = make_service(role, s.setup, &t);
  for (auto& [role, svc] : services) t.attach(role, svc.get());
  return run_scenario(s, t);
}

}  // namespace bandx::harness
