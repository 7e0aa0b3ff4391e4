#include "mw/sim.hpp"

#include <algorithm>
#include <ostream>

namespace mw::sim {

namespace {

constexpr std::uint64_t kSchedulerStream = 0x9E3779B97F4A7C15ULL;

double unit_of(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void SimConfig::validate() const {
  if (nodes < 1 || nodes > 26) throw ConfigError("nodes must be in [1, 26]");
  if (topology != "full" && topology != "ring" && topology != "line" && topology != "star") {
    throw ConfigError("topology must be full, ring, line or star");
  }
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1)");
  };
  prob(loss, "loss");
  prob(dup, "dup");
  prob(conflicts, "conflicts");
  if (txs > 64) throw ConfigError("txs must be at most 64");
  if (backend != "transparent" && backend != "toycurve") {
    throw ConfigError("backend must be transparent or toycurve");
  }
  if (bits < 1 || bits > crypto::max_range_bits(*group::make_backend(backend))) {
    throw ConfigError("bits out of range for backend " + backend);
  }
}

codec::json to_json(const SimConfig& c) {
  return {{"nodes", c.nodes}, {"topology", c.topology}, {"seed", c.seed},  {"steps", c.steps},
          {"loss", c.loss},   {"dup", c.dup},           {"txs", c.txs},    {"conflicts", c.conflicts},
          {"bits", c.bits},   {"backend", c.backend},   {"bootstrap", c.bootstrap}};
}

SimConfig config_from_json(const codec::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  SimConfig c;
  for (const auto& [key, v] : j.items()) {
    if ((key == "nodes" || key == "seed" || key == "steps" || key == "txs" || key == "bits") &&
        !(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0))) {
      throw ConfigError("config field '" + key + "' must be a non-negative integer");
    }
    try {
      if (key == "nodes") c.nodes = v.get<std::size_t>();
      else if (key == "topology") c.topology = v.get<std::string>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "steps") c.steps = v.get<std::size_t>();
      else if (key == "loss") c.loss = v.get<double>();
      else if (key == "dup") c.dup = v.get<double>();
      else if (key == "txs") c.txs = v.get<std::size_t>();
      else if (key == "conflicts") c.conflicts = v.get<double>();
      else if (key == "bits") c.bits = v.get<unsigned>();
      else if (key == "backend") c.backend = v.get<std::string>();
      else if (key == "bootstrap") c.bootstrap = v.get<bool>();
      else throw ConfigError("unknown config field '" + key + "'");
    } catch (const codec::json::exception& e) {
      throw ConfigError("config field '" + key + "': " + e.what());
    }
  }
  c.validate();
  return c;
}

std::vector<Addr> node_names(std::size_t n) {
  std::vector<Addr> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
  return out;
}

std::map<Addr, std::set<Addr>> peers(const std::vector<Addr>& nodes, const std::string& topology) {
  std::map<Addr, std::set<Addr>> out;
  const std::size_t n = nodes.size();
  auto link = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    out[nodes[a]].insert(nodes[b]);
    out[nodes[b]].insert(nodes[a]);
  };
  for (std::size_t i = 0; i < n; ++i) out[nodes[i]];
  for (std::size_t i = 0; i < n; ++i) {
    if (topology == "full") {
      for (std::size_t k = i + 1; k < n; ++k) link(i, k);
    } else if (topology == "ring") {
      link(i, (i + 1) % n);
    } else if (topology == "line") {
      if (i + 1 < n) link(i, i + 1);
    } else if (topology == "star") {
      link(0, i);
    }
  }
  return out;
}

Scenario make_scenario(const SimConfig& config) {
  config.validate();
  auto grp = group::make_backend(config.backend);
  auto params = tx::Params::with(grp, config.bits);
  std::mt19937_64 rng(config.seed);
  const std::uint64_t cap = (std::uint64_t{1} << config.bits) - 1;

  Scenario sc;
  std::set<Bytes> used_commitments;
  auto fresh = [&](std::uint64_t value) {
    for (;;) {
      tx::Opening o{grp->scalar(1 + rng() % (grp->order() - 1)), grp->scalar(value)};
      auto c = crypto::commit(*grp, o.blinding, o.value);
      if (used_commitments.insert(c.serialize()).second) {
        sc.openings.emplace(c.hex(), o);
        return o;
      }
    }
  };

  std::vector<tx::Opening> coins;
  for (std::size_t i = 0; i < std::max<std::size_t>(2, config.txs); ++i) coins.push_back(fresh(rng() % (cap + 1)));
  ledger::Block genesis = ledger::make_genesis(params, coins);
  sc.ctx = consensus::make_context(params, genesis);

  std::vector<std::size_t> spent;
  std::size_t next = 0;
  for (std::size_t i = 0; i < config.txs; ++i) {
    std::size_t pick;
    bool conflict = !spent.empty() && unit_of(rng) < config.conflicts;
    if (conflict || next == coins.size()) {
      pick = spent[rng() % spent.size()];
    } else {
      pick = next++;
      spent.push_back(pick);
    }
    std::uint64_t value = coins[pick].value.value();
    std::vector<tx::Opening> outs;
    if (rng() % 2 == 0) {
      outs.push_back(fresh(value));
    } else {
      std::uint64_t first = rng() % (value + 1);
      outs.push_back(fresh(first));
      outs.push_back(fresh(value - first));
    }
    std::vector<tx::Opening> ins{coins[pick]};
    sc.txs.push_back(consensus::make_tx_ref(tx::build_transaction(params, ins, outs), *grp));
  }

  sc.nodes = node_names(config.nodes);
  auto topo = peers(sc.nodes, config.topology);
  for (const auto& a : sc.nodes) sc.conf.delta.emplace(a, consensus::initial_state(sc.ctx, topo[a]));
  if (config.bootstrap) {
    for (const auto& a : sc.nodes) sc.conf.packets.insert({consensus::kExternal, a, consensus::AddrMsg{topo[a]}});
  }
  for (const auto& t : sc.txs) {
    sc.conf.packets.insert({consensus::kExternal, sc.nodes[rng() % sc.nodes.size()], consensus::TxMsg{t}});
  }
  return sc;
}

Simulator::Simulator(const SimConfig& config)
    : config_(config), scenario_(make_scenario(config)), rng_(config.seed ^ kSchedulerStream) {}

double Simulator::unit() { return unit_of(rng_); }

std::optional<StepRecord> Simulator::step() {
  auto evs = consensus::enabled_events(scenario_.ctx, scenario_.conf);
  if (evs.empty()) return std::nullopt;
  const auto& ev = evs[rng_() % evs.size()];
  bool lost = false, duplicated = false;
  if (ev.kind == consensus::EventKind::kDeliver) {
    lost = unit() < config_.loss;
    duplicated = !lost && unit() < config_.dup;
  }
  ++steps_;
  return consensus::apply_event(scenario_.ctx, scenario_.conf, ev, lost, duplicated);
}

codec::json init_event(const SimConfig& c) {
  return {{"step", 0}, {"transition", "init"}, {"config", to_json(c)}};
}

codec::json step_event(std::size_t step, const StepRecord& r, const group::Backend& grp) {
  codec::json j{{"step", step},
                {"node", r.node},
                {"transition", r.transition},
                {"out", consensus::to_json(r.out, grp)},
                {"tip", r.tip}};
  j["in"] = r.in ? consensus::to_json(*r.in, grp) : codec::json(nullptr);
  if (r.duplicated) j["dup"] = true;
  return j;
}

codec::json quiescent_event(std::size_t step) { return {{"step", step}, {"transition", "quiescent"}}; }

RunSummary run(const SimConfig& config, std::ostream& trace) {
  Simulator s(config);
  trace << init_event(config).dump() << '\n';
  RunSummary summary;
  while (s.steps_taken() < config.steps) {
    auto rec = s.step();
    if (!rec) {
      summary.quiescent = true;
      trace << quiescent_event(s.steps_taken() + 1).dump() << '\n';
      break;
    }
    trace << step_event(s.steps_taken(), *rec, s.context().grp()).dump() << '\n';
  }
  summary.steps = s.steps_taken();
  for (const auto& [a, st] : s.conf().delta) summary.tips[a] = consensus::best_tip(st);
  return summary;
}

}  // namespace mw::sim
