#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bandx/common/error.hpp"
#include "bandx/credential/text.hpp"
#include "bandx/harness/codec.hpp"
#include "bandx/harness/qna.hpp"
#include "bandx/harness/scenario.hpp"
#include "bandx/harness/service.hpp"

using namespace bandx;
using namespace bandx::harness;

namespace {

std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop = true; }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + path);
}

void connect_all(SocketTransport& t, const std::vector<std::string>& specs) {
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, "expected role=host:port, got " + s);
    t.set_endpoint(s.substr(0, eq), parse_endpoint(s.substr(eq + 1)));
  }
}

// Shared by the single-step verbs: a world file for keys and names, and the
// four running services.
struct Remote {
  std::string world;
  std::vector<std::string> connect;
  Scenario scenario;
  SocketTransport transport;
  std::unique_ptr<Client> client;
  isp::Topology topology;
  std::map<std::string, std::string> isps_by_key;

  void open() {
    scenario = load_scenario(world);
    connect_all(transport, connect);
    client = std::make_unique<Client>(transport);
    topology = isp::parse_topology(scenario.setup.topology_text);
    for (const auto& n : topology.isps) isps_by_key[scenario.setup.key_for("isp:" + n).id().str()] = n;
  }

  SimTime now() {
    return SimTime{client->call("isp", "operator", "REPORT", {}).payload.get_int("clock")};
  }

  std::unique_ptr<QnaSession> qna(const std::string& customer) {
    const CustomerSpec* spec = nullptr;
    for (const auto& c : scenario.setup.customers)
      if (c.name == customer) spec = &c;
    if (!spec) throw Error(ErrorCode::ConfigError, "unknown customer " + customer);
    auto key = scenario.setup.key_for("customer:" + customer);
    Payload p;
    p.set("guarantor", spec->guarantor);
    p.set("payer", key.id().str());
    p.set("limit", spec->limit.amount_str());
    p.set("currency", spec->limit.currency);
    p.set("expiry", spec->expiry.str());
    auto cwc = get_credential(client->call("guarantor", "qna:" + customer, "ISSUE-CWC", std::move(p)).payload,
                              "credential");
    // Nonces must not repeat across invocations, so this agent draws from the OS.
    return std::make_unique<QnaSession>(customer, key, cwc, crypto::make_random(std::nullopt, "qna:" + customer),
                                        *client, topology, isps_by_key);
  }
};

void add_remote(CLI::App* cmd, Remote& r) {
  cmd->add_option("--world", r.world, "scenario file whose setup lines describe the world")->required();
  cmd->add_option("--connect", r.connect, "role=host:port, one per role")->required()->allow_extra_args(false);
}

market::OfferQuery make_query(const std::string& from, const std::string& to, std::int64_t mbps, SimTime now,
                              const std::string& max_price) {
  market::OfferQuery q;
  q.from = from;
  q.to = to;
  q.min_bandwidth_mbps = mbps;
  q.needed_on = date_of(now);
  if (!max_price.empty()) {
    auto m = parse_minor_units(max_price);
    if (!m) throw Error(ErrorCode::BadRequest, "bad amount " + max_price);
    q.max_total_price = Money{*m, "USD"};
  }
  return q;
}

void print_handle(const PurchaseHandle& h) {
  for (const auto& leg : h.legs)
    std::cout << leg.isp << " " << leg.reservation_id << " " << isp::to_string(leg.state) << "\n";
  std::cout << "total " << h.total.amount_str() << " " << h.total.currency << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bandx: bandwidth exchange desk tools"};
  app.require_subcommand(1);

  std::string label, key_out;
  auto* keygen = app.add_subcommand("keygen", "write a new signing key seed and print its key id");
  keygen->add_option("--label", label, "derive the key from this label instead of fresh randomness");
  keygen->add_option("-o,--out", key_out, "seed file");

  Remote remote;
  std::string isp_name, from, to, price, expires, hint, max_price, customer, handle_path, at;
  std::int64_t mbps = 0, duration = 0;
  bool fixed = false, premium = false;

  auto* post = app.add_subcommand("post-offer", "have an ISP sign an offer and post it");
  add_remote(post, remote);
  post->add_option("isp", isp_name)->required();
  post->add_option("from", from)->required();
  post->add_option("to", to)->required();
  post->add_option("mbps", mbps)->required();
  post->add_option("price", price)->required();
  post->add_option("--expires", expires, "YYYYMMDD");
  post->add_option("--hint", hint, "comma-separated NE path");
  post->add_flag("--fixed", fixed, "no unbundling");
  post->add_flag("--premium", premium, "premium best-effort class");

  auto* search = app.add_subcommand("search", "compose the cheapest path");
  add_remote(search, remote);
  search->add_option("from", from)->required();
  search->add_option("to", to)->required();
  search->add_option("mbps", mbps)->required();
  search->add_option("--max-price", max_price);

  auto* buy = app.add_subcommand("buy", "buy spot bandwidth end to end");
  add_remote(buy, remote);
  buy->add_option("customer", customer)->required();
  buy->add_option("from", from)->required();
  buy->add_option("to", to)->required();
  buy->add_option("mbps", mbps)->required();
  buy->add_option("duration", duration, "seconds")->required();
  buy->add_option("--max-price", max_price);
  buy->add_option("--handle", handle_path, "write the purchase handle here");

  auto* book = app.add_subcommand("book", "book future bandwidth");
  add_remote(book, remote);
  book->add_option("customer", customer)->required();
  book->add_option("from", from)->required();
  book->add_option("to", to)->required();
  book->add_option("mbps", mbps)->required();
  book->add_option("--at", at, "start time, YYYY-MM-DDTHH:MM:SSZ or +seconds")->required();
  book->add_option("--for", duration, "seconds")->required();
  book->add_option("--max-price", max_price);
  book->add_option("--handle", handle_path)->required();

  auto* activate = app.add_subcommand("activate", "activate a booked reservation");
  add_remote(activate, remote);
  activate->add_option("customer", customer)->required();
  activate->add_option("--handle", handle_path)->required();

  auto* deposit = app.add_subcommand("deposit", "flush ISP deposits to the settlement center");
  add_remote(deposit, remote);

  auto* report = app.add_subcommand("report", "print every role's state");
  add_remote(report, remote);

  std::string scenario_path, transcript_path, report_path;
  std::vector<std::string> run_connect;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", scenario_path)->required();
  run->add_option("--connect", run_connect, "role=host:port; all four roles, or none for in-process")->allow_extra_args(false);
  run->add_option("--transcript", transcript_path);
  run->add_option("--report", report_path, "default: stdout");

  std::string role, port_file, journal;
  std::vector<std::string> peers;
  int port = 0;
  auto* serve = app.add_subcommand("serve", "serve one role over TCP on loopback");
  serve->add_option("role", role)->required()->check(CLI::IsMember(all_roles()));
  serve->add_option("--scenario", scenario_path, "world setup")->required();
  serve->add_option("--port", port);
  serve->add_option("--port-file", port_file, "write the bound port here");
  serve->add_option("--peer", peers, "csc=host:port (isp role)")->allow_extra_args(false);
  serve->add_option("--journal", journal, "settlement journal (csc role)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (keygen->parsed()) {
      auto key = label.empty() ? [] {
        auto rng = crypto::make_random(std::nullopt, "keygen");
        return credential::SigningKey::generate(*rng);
      }()
                               : credential::SigningKey::derive(label);
      if (!key_out.empty()) spill(key_out, key.seed_base64() + "\n");
      std::cout << key.id().str() << "\n";
      return 0;
    }

    if (run->parsed()) {
      Scenario s = load_scenario(scenario_path);
      RunResult r;
      if (run_connect.empty()) {
        r = run_scenario_in_process(s);
      } else {
        SocketTransport t;
        connect_all(t, run_connect);
        r = run_scenario(s, t);
      }
      if (!transcript_path.empty()) spill(transcript_path, r.transcript);
      if (report_path.empty()) std::cout << r.report;
      else spill(report_path, r.report);
      if (!r.message.empty()) std::cerr << "bandx: " << r.message << "\n";
      return r.exit_code;
    }

    if (serve->parsed()) {
      Scenario s = load_scenario(scenario_path);
      if (!journal.empty()) s.setup.csc_journal = journal;
      SocketTransport peer;
      connect_all(peer, peers);
      auto service = make_service(role, s.setup, &peer);
      if (s.clock_set) service->set_clock(s.setup.clock);
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::signal(SIGPIPE, SIG_IGN);
      serve_socket(
          *service, port,
          [&](int bound) {
            if (!port_file.empty()) {
              spill(port_file + ".tmp", std::to_string(bound) + "\n");
              std::filesystem::rename(port_file + ".tmp", port_file);
            }
            std::cerr << "bandx: " << role << " listening on 127.0.0.1:" << bound << "\n";
          },
          [] { return g_stop.load(); });
      return 0;
    }

    remote.open();
    Client& c = *remote.client;
    if (post->parsed()) {
      SimTime now = remote.now();
      Payload p;
      p.set("isp", isp_name);
      p.set("from", from);
      p.set("to", to);
      p.set("bandwidth", mbps);
      p.set("price", price);
      p.set("currency", "USD");
      p.set("expires", expires.empty() ? date_of(now).plus_days(30).str() : expires);
      p.set("unbundling", fixed ? "false" : "true");
      if (premium) p.set("qos_class", "premium_best_effort");
      if (!hint.empty()) p.set("path_hint", hint);
      auto cred = c.call("isp", "operator:" + isp_name, "ISSUE-OFFER", std::move(p)).payload.block("credential");
      Payload posted;
      posted.add_block("offer", cred);
      c.call("clearinghouse", "isp:" + isp_name, "POST-OFFER", std::move(posted));
      std::cout << cred;
    } else if (search->parsed()) {
      Payload p;
      put_query(p, make_query(from, to, mbps, remote.now(), max_price));
      auto plan = get_plan(c.call("clearinghouse", "operator", "COMPOSE", std::move(p)).payload);
      for (const auto& st : plan.steps)
        std::cout << st.offer.link.name() << " " << st.purchased_mbps << "Mbps " << st.price.amount_str() << "\n";
      std::cout << "total " << plan.total_price.amount_str() << " " << plan.total_price.currency << "\n";
    } else if (buy->parsed()) {
      SimTime now = remote.now();
      auto h = remote.qna(customer)->purchase_spot(make_query(from, to, mbps, now, max_price), duration, now);
      if (!handle_path.empty()) spill(handle_path, encode_handle(h));
      print_handle(h);
    } else if (book->parsed()) {
      SimTime now = remote.now();
      SimTime start;
      if (!at.empty() && at.front() == '+') {
        start = now.plus(std::stoll(at.substr(1)));
      } else {
        auto t = try_parse_time(at);
        if (!t) throw Error(ErrorCode::BadRequest, "bad time " + at);
        start = *t;
      }
      auto h = remote.qna(customer)->purchase_future(make_query(from, to, mbps, now, max_price),
                                                     isp::Interval{start, start.plus(duration)}, now);
      spill(handle_path, encode_handle(h));
      print_handle(h);
    } else if (activate->parsed()) {
      auto h = decode_handle(slurp(handle_path));
      remote.qna(customer)->activate(h, remote.now());
      spill(handle_path, encode_handle(h));
      print_handle(h);
    } else if (deposit->parsed()) {
      auto reply = c.call("isp", "operator", "DEPOSIT-FLUSH", {});
      std::cout << reply.payload.encode();
    } else if (report->parsed()) {
      for (const auto& r : all_roles()) {
        std::cout << "[" << r << "]\n" << c.call(r, "operator", "REPORT", {}).payload.encode();
      }
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "bandx: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::ProtocolError || e.code() == ErrorCode::ScenarioParseError ||
                   e.code() == ErrorCode::IoError || e.code() == ErrorCode::ConfigError
               ? 3
               : 1;
  } catch (const std::exception& e) {
    std::cerr << "bandx: " << e.what() << "\n";
    return 1;
  }
}
