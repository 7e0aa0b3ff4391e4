#include <doctest.h>

#include <sstream>

#include "mw/monitor.hpp"

using namespace mw;
using namespace mw::monitor;

namespace {

std::vector<json> trace_lines(const sim::SimConfig& c) {
  std::ostringstream out;
  sim::run(c, out);
  std::vector<json> lines;
  std::istringstream in(out.str());
  for (std::string l; std::getline(in, l);) lines.push_back(json::parse(l));
  return lines;
}

std::string join(const std::vector<json>& lines) {
  std::string s;
  for (const auto& l : lines) s += l.dump() + '\n';
  return s;
}

struct Run {
  Summary summary;
  std::vector<Alarm> alarms;
};

Run monitor_text(const std::string& text) {
  std::istringstream in(text);
  Run r;
  r.summary = run_monitor(in, [&](const Alarm& a) { r.alarms.push_back(a); });
  return r;
}

sim::SimConfig busy(std::uint64_t seed) {
  sim::SimConfig c;
  c.seed = seed;
  c.txs = 16;
  c.steps = 1000;
  return c;
}

}  // namespace

TEST_CASE("monitor: empty trace gives an empty summary") {
  auto r = monitor_text("");
  CHECK(r.summary.events == 0);
  CHECK(r.alarms.empty());
}

TEST_CASE("monitor: simulator traces raise no alarm") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto c = busy(seed);
    c.loss = 0.05;
    c.dup = 0.05;
    auto lines = trace_lines(c);
    auto r = monitor_text(join(lines));
    CHECK(r.summary.events == lines.size() - 1);
    CHECK_MESSAGE(r.alarms.empty(), "seed " << seed << ": " << (r.alarms.empty() ? "" : r.alarms[0].reason));
    CHECK(r.summary.mean_event_us > 0.0);
  }
}

TEST_CASE("monitor: end-state hash matches the simulator's final configuration") {
  auto c = busy(5);
  std::ostringstream out;
  sim::Simulator s(c);
  out << sim::init_event(c).dump() << '\n';
  while (s.steps_taken() < 300) {
    auto rec = s.step();
    if (!rec) break;
    out << sim::step_event(s.steps_taken(), *rec, s.context().grp()).dump() << '\n';
  }
  auto r = monitor_text(out.str());
  CHECK(r.alarms.empty());
  CHECK(r.summary.end_state == state_hash(s.conf()));
}

TEST_CASE("monitor: each injected fault raises exactly one divergence alarm at its index") {
  auto lines = trace_lines(busy(7));
  for (Fault f : all_faults()) {
    auto inj = inject_fault(lines, f, 200);
    CHECK(inj.step >= 200);
    CHECK(inj.lines.size() == lines.size() + 1);
    auto r = monitor_text(join(inj.lines));
    REQUIRE_MESSAGE(r.alarms.size() == 1, fault_name(f));
    CHECK(r.alarms[0].kind == AlarmKind::kDivergence);
    CHECK_MESSAGE(r.alarms[0].seq == inj.step, fault_name(f));
    CHECK(r.summary.divergence_alarms == 1);
  }
}

TEST_CASE("monitor: injected payloads are rejected by the model for the intended reason") {
  auto lines = trace_lines(busy(8));
  auto config = sim::config_from_json(lines[0]["config"]);
  auto sc = sim::make_scenario(config);
  const auto& params = sc.ctx.params;
  std::map<Fault, Reason> expected{{Fault::kUnbalanced, Reason::kUnbalanced},
                                   {Fault::kForgedRangeProof, Reason::kRangeProof},
                                   {Fault::kBadSignature, Reason::kKernelSignature}};
  for (Fault f : all_faults()) {
    auto inj = inject_fault(lines, f, 100);
    auto ev = parse_event(inj.lines[inj.step], sc.ctx.grp());
    REQUIRE(ev.in);
    if (auto* t = std::get_if<consensus::TxMsg>(&ev.in->msg)) {
      auto v = tx::validate_transaction(*t->tx.tx, params);
      if (f == Fault::kUnknownInput) {
        CHECK(v.ok());
      } else {
        CHECK_MESSAGE(v.reason == expected.at(f), fault_name(f) << ": " << v.to_string());
      }
    } else {
      REQUIRE(f == Fault::kDoubleSpend);
      const auto& nb = *std::get<consensus::BlockMsg>(ev.in->msg).block.block;
      CHECK(validate_block(nb.payload, params).ok());
    }
  }
}

TEST_CASE("monitor: alarm fires no later than the first invalid shadow chain") {
  // A faulty node that adopts the double-spending block would expose an
  // invalid chain from the inserted event on; the alarm is at that event.
  auto lines = trace_lines(busy(9));
  auto inj = inject_fault(lines, Fault::kDoubleSpend, 50);
  auto r = monitor_text(join(inj.lines));
  REQUIRE(r.alarms.size() == 1);
  CHECK(r.alarms[0].seq <= inj.step);
  CHECK(r.alarms[0].action == Action::kStop);
  CHECK(r.alarms[0].expected_tip != r.alarms[0].observed_tip);
}

TEST_CASE("monitor: parse alarms") {
  auto lines = trace_lines(busy(4));
  lines.resize(20);

  SUBCASE("out-of-order sequence numbers") {
    std::swap(lines[5], lines[6]);
    auto r = monitor_text(join(lines));
    REQUIRE_FALSE(r.alarms.empty());
    CHECK(r.alarms[0].kind == AlarmKind::kParse);
    CHECK(r.summary.parse_alarms >= 1);
  }
  SUBCASE("malformed JSON") {
    auto text = join(lines);
    text.insert(text.find('\n') + 1, "{not json\n");
    auto r = monitor_text(text);
    REQUIRE(r.alarms.size() == 1);
    CHECK(r.alarms[0].kind == AlarmKind::kParse);
  }
  SUBCASE("missing init line") {
    lines.erase(lines.begin());
    auto r = monitor_text(join(lines));
    REQUIRE(r.alarms.size() == 1);
    CHECK(r.alarms[0].kind == AlarmKind::kParse);
  }
  SUBCASE("unknown transition") {
    // The shadow misses the real step, so later events cascade; the first
    // alarm is the parse alarm.
    lines[3]["transition"] = "rcvTeleport";
    auto r = monitor_text(join(lines));
    REQUIRE_FALSE(r.alarms.empty());
    CHECK(r.alarms[0].kind == AlarmKind::kParse);
    CHECK(r.alarms[0].seq == lines[3]["step"].get<std::uint64_t>());
  }
}

TEST_CASE("monitor: divergence kinds") {
  auto lines = trace_lines(busy(6));
  auto with = [&](std::size_t i, auto&& edit) {
    auto copy = lines;
    edit(copy[i]);
    return monitor_text(join(copy));
  };
  // A packet that was never sent and does not come from outside.
  auto ghost = with(4, [](json& e) {
    if (!e["in"].is_null()) e["in"]["origin"] = "n9";
  });
  CHECK(ghost.alarms.size() >= 1);
  CHECK(ghost.alarms[0].kind == AlarmKind::kDivergence);

  // Observed tip differs from the model; the shadow stays behind, so the
  // first alarm is the one that counts.
  std::size_t i = 1;
  while (lines[i]["transition"] != "mintBlock") ++i;
  auto tip = with(i, [](json& e) { e["tip"] = std::string(64, 'f'); });
  REQUIRE_FALSE(tip.alarms.empty());
  CHECK(tip.alarms[0].reason == "best tip differs");
  CHECK(tip.alarms[0].seq == lines[i]["step"].get<std::uint64_t>());

  // Premature quiescence.
  auto copy = lines;
  copy.resize(10);
  copy.push_back(sim::quiescent_event(10));
  auto q = monitor_text(join(copy));
  REQUIRE(q.alarms.size() == 1);
  CHECK(q.alarms[0].reason.find("enabled") != std::string::npos);
}

TEST_CASE("alarm and summary JSON") {
  Alarm a;
  a.seq = 3;
  a.reason = "x";
  a.severity = "critical";
  a.action = Action::kStop;
  auto j = to_json(a);
  CHECK(j["kind"] == "divergence");
  CHECK(j["action"] == "stop");
  CHECK(j["expected_tip"].is_null());
  Summary s;
  s.divergence_alarms = 2;
  s.parse_alarms = 1;
  CHECK(to_json(s)["alarms"] == 3);
  for (Fault f : all_faults()) CHECK(fault_from_name(fault_name(f)) == f);
  CHECK_FALSE(fault_from_name("nope"));
}
