#include "mw/monitor.hpp"

#include <chrono>
#include <istream>

#include "mw/hash.hpp"

namespace mw::monitor {

namespace {

Alarm divergence(const MonitorEvent& ev, std::string reason, Action action,
                 std::optional<Hash> expected = std::nullopt) {
  Alarm a;
  a.seq = ev.seq;
  a.kind = AlarmKind::kDivergence;
  a.reason = std::move(reason);
  a.expected_tip = std::move(expected);
  if (!ev.tip.empty()) a.observed_tip = ev.tip;
  a.severity = "critical";
  a.action = action;
  return a;
}

Alarm parse_alarm(std::uint64_t seq, std::string reason) {
  Alarm a;
  a.seq = seq;
  a.kind = AlarmKind::kParse;
  a.reason = std::move(reason);
  a.severity = "warning";
  a.action = Action::kObserve;
  return a;
}

Action action_for(const std::string& transition) {
  if (transition == "rcvBlock" || transition == "mintBlock") return Action::kStop;
  if (transition == "rcvTx") return Action::kSuspend;
  return Action::kObserve;
}

const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw DecodeError(std::string("event needs field '") + key + "'");
  return j[key];
}

}  // namespace

MonitorEvent parse_event(const json& j, const group::Backend& grp) {
  MonitorEvent ev;
  const json& step = need(j, "step");
  if (!step.is_number_unsigned() && !(step.is_number_integer() && step.get<std::int64_t>() >= 0)) {
    throw DecodeError("step must be a non-negative integer");
  }
  ev.seq = step.get<std::uint64_t>();
  const json& tr = need(j, "transition");
  if (!tr.is_string()) throw DecodeError("transition must be a string");
  ev.transition = tr.get<std::string>();
  if (ev.transition == "quiescent") return ev;
  static const std::set<std::string> known{"rcvAddr", "rcvConnect", "rcvTx", "rcvBlock", "mintBlock", "drop"};
  if (!known.count(ev.transition)) throw DecodeError("unknown transition '" + ev.transition + "'");
  const json& node = need(j, "node");
  const json& tip = need(j, "tip");
  if (!node.is_string() || !tip.is_string()) throw DecodeError("node and tip must be strings");
  ev.node = node.get<std::string>();
  ev.tip = tip.get<std::string>();
  if (j.contains("in") && !j["in"].is_null()) ev.in = consensus::packet_from_json(j["in"], grp);
  ev.out = consensus::packet_set_from_json(need(j, "out"), grp);
  if (j.contains("dup")) {
    if (!j["dup"].is_boolean()) throw DecodeError("dup must be a boolean");
    ev.dup = j["dup"].get<bool>();
  }
  return ev;
}

std::string_view action_name(Action a) {
  switch (a) {
    case Action::kStop: return "stop";
    case Action::kSuspend: return "suspend";
    case Action::kObserve: return "observe";
  }
  return "observe";
}

json to_json(const Alarm& a) {
  json j{{"seq", a.seq},
         {"kind", a.kind == AlarmKind::kParse ? "parse" : "divergence"},
         {"reason", a.reason},
         {"severity", a.severity},
         {"action", action_name(a.action)}};
  j["expected_tip"] = a.expected_tip ? json(*a.expected_tip) : json(nullptr);
  j["observed_tip"] = a.observed_tip ? json(*a.observed_tip) : json(nullptr);
  return j;
}

IngestResult ingest(const Context& ctx, const Conf& shadow, const MonitorEvent& ev, ValidityCache* cache) {
  IngestResult r{shadow, std::nullopt};
  auto fail = [&](std::string reason, std::optional<Hash> expected = std::nullopt) {
    r.conf = shadow;
    r.alarm = divergence(ev, std::move(reason), action_for(ev.transition), std::move(expected));
    return r;
  };

  if (ev.transition == "quiescent") {
    if (!consensus::enabled_events(ctx, shadow).empty()) {
      return fail("implementation stopped while the model still has enabled transitions");
    }
    return r;
  }
  auto node = shadow.delta.find(ev.node);
  if (node == shadow.delta.end()) return fail("unknown node " + ev.node);
  const Hash before = consensus::best_tip(node->second);

  consensus::StepRecord rec;
  if (ev.transition == "mintBlock") {
    if (ev.in) return fail("mintBlock consumes no packet", before);
    if (consensus::mintable(ctx, node->second).empty()) return fail("mintBlock is not enabled", before);
    rec = consensus::apply_event(ctx, r.conf, {consensus::EventKind::kMint, ev.node, std::nullopt});
  } else {
    if (!ev.in) return fail(ev.transition + " needs an input packet", before);
    const auto& p = *ev.in;
    if (p.dest != ev.node) return fail("packet addressed to " + p.dest + " delivered at " + ev.node, before);
    if (!shadow.packets.contains(p) && p.origin != consensus::kExternal) {
      return fail("packet is neither in flight nor external", before);
    }
    bool lost = ev.transition == "drop";
    if (!lost && consensus::transition_name(p.msg) != ev.transition) {
      return fail("transition " + ev.transition + " does not match the packet kind", before);
    }
    rec = consensus::apply_event(ctx, r.conf, {consensus::EventKind::kDeliver, ev.node, p}, lost, ev.dup);
  }

  if (!(rec.out == ev.out)) {
    return fail("emitted packets differ: model " + std::to_string(rec.out.size()) + ", observed " +
                    std::to_string(ev.out.size()),
                rec.tip);
  }
  if (rec.tip != ev.tip) return fail("best tip differs", rec.tip);

  bool valid;
  if (cache && cache->count(rec.tip)) {
    valid = cache->at(rec.tip);
  } else {
    valid = ledger::valid_chain(consensus::best_chain(r.conf.delta.at(ev.node)), ctx.params).ok();
    if (cache) (*cache)[rec.tip] = valid;
  }
  if (!valid) return fail("best chain fails valid_chain", rec.tip);
  return r;
}

Hash state_hash(const Conf& conf) {
  json nodes = json::object();
  for (const auto& [a, st] : conf.delta) {
    json bf = json::array(), tp = json::array(), orphans = json::array();
    for (const auto& [h, b] : st.bf) bf.push_back(h);
    for (const auto& [h, t] : st.tp) tp.push_back(h);
    for (const auto& [h, b] : st.orphans) orphans.push_back(h);
    nodes[a] = {{"as", st.as}, {"bf", bf}, {"tp", tp}, {"orphans", orphans}, {"tip", consensus::best_tip(st)}};
  }
  json packets = json::array();
  for (const auto& [key, p] : conf.packets) packets.push_back(key);
  Hasher h("mw/monitor/state");
  h.update(json{{"nodes", nodes}, {"packets", packets}, {"delivered", conf.delivered}}.dump());
  auto d = h.finish();
  return to_hex(ByteView(d.data(), d.size()));
}

json to_json(const Summary& s) {
  return {{"events", s.events},
          {"alarms", s.alarms()},
          {"divergence_alarms", s.divergence_alarms},
          {"parse_alarms", s.parse_alarms},
          {"end_state", s.end_state},
          {"mean_event_us", s.mean_event_us},
          {"max_event_us", s.max_event_us}};
}

// ---- Monitor -------------------------------------------------------------------

Monitor::Monitor(const sim::SimConfig& config)
    : scenario_(sim::make_scenario(config)), shadow_(scenario_.conf) {}

std::optional<Alarm> Monitor::record(std::optional<Alarm> a) {
  if (a) ++(a->kind == AlarmKind::kParse ? parse_ : divergence_);
  return a;
}

std::optional<Alarm> Monitor::ingest_line(std::string_view line) {
  json j;
  try {
    j = codec::parse(line);
  } catch (const DecodeError& e) {
    ++events_;
    return record(parse_alarm(last_seq_ ? *last_seq_ + 1 : 1, e.what()));
  }
  return ingest_json(j);
}

std::optional<Alarm> Monitor::ingest_json(const json& j) {
  auto start = std::chrono::steady_clock::now();
  ++events_;
  std::optional<Alarm> alarm;
  try {
    auto ev = parse_event(j, scenario_.ctx.grp());
    if (last_seq_ && ev.seq <= *last_seq_) {
      alarm = parse_alarm(ev.seq, "sequence number " + std::to_string(ev.seq) + " does not increase");
    } else {
      last_seq_ = ev.seq;
      auto r = ingest(scenario_.ctx, shadow_, ev, &cache_);
      if (r.alarm) {
        alarm = r.alarm;
      } else {
        shadow_ = std::move(r.conf);
      }
    }
  } catch (const DecodeError& e) {
    alarm = parse_alarm(last_seq_ ? *last_seq_ + 1 : 1, e.what());
  }
  double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - start).count();
  total_us_ += us;
  max_us_ = std::max(max_us_, us);
  return record(std::move(alarm));
}

Summary Monitor::summary() const {
  Summary s;
  s.events = events_;
  s.divergence_alarms = divergence_;
  s.parse_alarms = parse_;
  s.end_state = state_hash(shadow_);
  s.mean_event_us = events_ ? total_us_ / static_cast<double>(events_) : 0.0;
  s.max_event_us = max_us_;
  return s;
}

Summary run_monitor(std::istream& trace, const std::function<void(const Alarm&)>& sink) {
  std::string line;
  if (!std::getline(trace, line)) return {};
  std::optional<Monitor> m;
  try {
    auto j = codec::parse(line);
    if (!j.is_object() || j.value("transition", "") != "init" || !j.contains("config")) {
      throw DecodeError("first line must be the init event");
    }
    m.emplace(sim::config_from_json(j["config"]));
  } catch (const std::exception& e) {
    Summary s;
    s.parse_alarms = 1;
    sink(parse_alarm(0, e.what()));
    return s;
  }
  while (std::getline(trace, line)) {
    if (line.empty()) continue;
    if (auto a = m->ingest_line(line)) sink(*a);
  }
  return m->summary();
}

// ---- fault injection -------------------------------------------------------------

std::string_view fault_name(Fault f) {
  switch (f) {
    case Fault::kDoubleSpend: return "double-spend";
    case Fault::kUnbalanced: return "unbalanced";
    case Fault::kForgedRangeProof: return "forged-range-proof";
    case Fault::kBadSignature: return "bad-signature";
    case Fault::kUnknownInput: return "unknown-input";
  }
  return "";
}

std::optional<Fault> fault_from_name(std::string_view name) {
  for (Fault f : all_faults()) {
    if (fault_name(f) == name) return f;
  }
  return std::nullopt;
}

const std::vector<Fault>& all_faults() {
  static const std::vector<Fault> v{Fault::kDoubleSpend, Fault::kUnbalanced, Fault::kForgedRangeProof,
                                    Fault::kBadSignature, Fault::kUnknownInput};
  return v;
}

namespace {

struct FaultBuilder {
  const sim::Scenario& sc;
  const Conf& shadow;
  std::mt19937_64 rng;

  const Context& ctx() const { return sc.ctx; }
  const group::Backend& grp() const { return sc.ctx.grp(); }
  std::uint64_t cap() const { return (std::uint64_t{1} << ctx().params.range_bits) - 1; }

  tx::Opening fresh(std::uint64_t value) {
    return {grp().scalar(1 + rng() % (grp().order() - 1)), grp().scalar(value)};
  }

  // First unspent coin of `st`'s best chain whose opening the scenario knows.
  std::optional<tx::Opening> spendable(const consensus::LocState& st) const {
    ledger::ChainState state(ctx().params);
    for (const auto& b : consensus::best_path(st)) state.apply(b.block->payload);
    for (const auto& c : state.utxo().commitments()) {
      if (auto it = sc.openings.find(c.hex()); it != sc.openings.end()) return it->second;
    }
    return std::nullopt;
  }

  consensus::StepRecord relay(const Addr& node, const consensus::LocState& st, const consensus::Msg& m,
                              Hash tip) const {
    consensus::StepRecord rec;
    rec.node = node;
    rec.transition = consensus::transition_name(m);
    rec.in = consensus::Packet{consensus::kExternal, node, m};
    for (const auto& a : st.as) rec.out.insert({node, a, m});
    rec.tip = std::move(tip);
    return rec;
  }

  std::optional<consensus::StepRecord> build(Fault fault) {
    for (const auto& [node, st] : shadow.delta) {
      if (fault == Fault::kDoubleSpend) {
        auto path = consensus::best_path(st);
        for (auto it = path.rbegin(); it != path.rend(); ++it) {
          const auto& inputs = it->block->payload.inputs;
          if (inputs.empty()) continue;
          auto opening = sc.openings.find(inputs.front().commitment.hex());
          if (opening == sc.openings.end()) continue;
          std::vector<tx::Opening> in{opening->second}, out{fresh(opening->second.value.value())};
          std::vector<tx::Transaction> txs{tx::build_transaction(ctx().params, in, out)};
          auto block = consensus::make_block_ref(
              {path.back().hash, ledger::aggregate(txs, grp().scalar(0), ctx().params), node}, grp());
          return relay(node, st, consensus::BlockMsg{block}, block.hash);
        }
        continue;
      }

      std::vector<tx::Opening> in;
      if (fault == Fault::kUnknownInput) {
        in.push_back(fresh(rng() % (cap() + 1)));
      } else if (auto coin = spendable(st)) {
        in.push_back(*coin);
      } else {
        continue;
      }
      std::uint64_t value = in[0].value.value();
      std::vector<tx::Opening> out{fresh(value)};
      auto t = tx::build_transaction(ctx().params, in, out);
      auto& k = t.kernels.front();
      switch (fault) {
        case Fault::kUnbalanced: {
          // Re-commit the output to a neighbouring value with an honest proof;
          // the kernel still signs the old excess.
          tx::Opening bumped{out[0].blinding, grp().scalar(value < cap() ? value + 1 : value - 1)};
          t.outputs[0].commitment = crypto::commit(grp(), bumped.blinding, bumped.value);
          t.outputs[0].opening = bumped;
          k.range_proofs[0] =
              ctx().params.prover->prove(grp(), bumped.blinding, bumped.value, ctx().params.range_bits);
          break;
        }
        case Fault::kForgedRangeProof:
          k.range_proofs[0].bit_proofs[0].s0 += grp().scalar(1);
          break;
        case Fault::kBadSignature:
          k.signature.response += grp().scalar(1);
          break;
        default:
          break;
      }
      return relay(node, st, consensus::TxMsg{consensus::make_tx_ref(std::move(t), grp())},
                   consensus::best_tip(st));
    }
    return std::nullopt;
  }
};

}  // namespace

Injection inject_fault(const std::vector<json>& lines, Fault fault, std::uint64_t min_step) {
  if (lines.empty() || lines[0].value("transition", "") != "init") {
    throw std::invalid_argument("trace must start with the init event");
  }
  auto config = sim::config_from_json(lines[0]["config"]);
  auto sc = sim::make_scenario(config);
  Conf shadow = sc.conf;
  ValidityCache cache;
  const auto seed = config.seed ^ (0xFA17ULL + static_cast<std::uint64_t>(fault));

  for (std::size_t i = 1; i <= lines.size(); ++i) {
    bool at_end = i == lines.size();
    std::uint64_t step = at_end ? lines[i - 1].value("step", std::uint64_t{0}) + 1
                                : lines[i].at("step").get<std::uint64_t>();
    if (step >= min_step) {
      FaultBuilder b{sc, shadow, std::mt19937_64(seed)};
      if (auto rec = b.build(fault)) {
        Injection inj;
        inj.step = step;
        inj.lines.assign(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(i));
        inj.lines.push_back(sim::step_event(step, *rec, sc.ctx.grp()));
        for (std::size_t k = i; k < lines.size(); ++k) {
          json moved = lines[k];
          moved["step"] = moved.at("step").get<std::uint64_t>() + 1;
          inj.lines.push_back(std::move(moved));
        }
        return inj;
      }
    }
    if (at_end) break;
    auto r = ingest(sc.ctx, shadow, parse_event(lines[i], sc.ctx.grp()), &cache);
    if (r.alarm) throw std::invalid_argument("trace is not clean at step " + std::to_string(step));
    shadow = std::move(r.conf);
  }
  throw std::invalid_argument(std::string("no position admits fault ") + std::string(fault_name(fault)));
}

}  // namespace mw::monitor
