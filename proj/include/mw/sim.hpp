#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mw/consensus.hpp"

namespace mw::sim {

using consensus::Addr;
using consensus::Conf;
using consensus::Context;
using consensus::StepRecord;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Simulation parameters. Everything random derives from `seed`.
struct SimConfig {
  std::size_t nodes = 5;
  std::string topology = "full";  // full | ring | line | star
  std::uint64_t seed = 42;
  std::size_t steps = 1000;
  double loss = 0.0;
  double dup = 0.0;
  std::size_t txs = 8;
  /// Probability that a generated transaction re-spends an already used coin.
  double conflicts = 0.25;
  unsigned bits = 4;
  std::string backend = "transparent";
  /// Whether the environment opens with an AddrMsg to every node.
  bool bootstrap = true;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

codec::json to_json(const SimConfig& c);
/// Missing fields keep their defaults; unknown fields are rejected.
SimConfig config_from_json(const codec::json& j);

std::vector<Addr> node_names(std::size_t n);
/// Initial peer sets of `topology` over `nodes`.
std::map<Addr, std::set<Addr>> peers(const std::vector<Addr>& nodes, const std::string& topology);

/// The world described by a config before the first step: genesis, the
/// transactions the environment will inject and every opening involved.
struct Scenario {
  Context ctx;
  Conf conf;
  std::vector<Addr> nodes;
  std::vector<consensus::TxRef> txs;
  /// Openings of genesis outputs and generated outputs keyed by commitment hex.
  std::map<std::string, tx::Opening> openings;
};

Scenario make_scenario(const SimConfig& config);

/// Seeded deterministic scheduler over a scenario.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  const SimConfig& config() const { return config_; }
  const Scenario& scenario() const { return scenario_; }
  const Context& context() const { return scenario_.ctx; }
  const Conf& conf() const { return scenario_.conf; }
  std::size_t steps_taken() const { return steps_; }

  /// One global step; nullopt at a fixed point (no enabled event).
  std::optional<StepRecord> step();

 private:
  double unit();

  SimConfig config_;
  Scenario scenario_;
  std::mt19937_64 rng_;
  std::size_t steps_ = 0;
};

codec::json init_event(const SimConfig& c);
codec::json step_event(std::size_t step, const StepRecord& r, const group::Backend& grp);
codec::json quiescent_event(std::size_t step);

struct RunSummary {
  std::size_t steps = 0;
  bool quiescent = false;
  std::map<Addr, consensus::Hash> tips;
};

/// Runs up to config.steps steps writing one JSON line per event to `trace`.
RunSummary run(const SimConfig& config, std::ostream& trace);

}  // namespace mw::sim
