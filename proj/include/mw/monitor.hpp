#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mw/sim.hpp"

namespace mw::monitor {

using consensus::Addr;
using consensus::Conf;
using consensus::Context;
using consensus::Hash;
using codec::json;

/// One observed implementation step, abstracted to the model's vocabulary.
struct MonitorEvent {
  std::uint64_t seq = 0;
  Addr node;
  std::string transition;
  std::optional<consensus::Packet> in;
  bool dup = false;
  consensus::PacketSet out;
  Hash tip;
};

/// Throws DecodeError on a malformed line.
MonitorEvent parse_event(const json& j, const group::Backend& grp);

enum class AlarmKind { kParse, kDivergence };
enum class Action { kStop, kSuspend, kObserve };

struct Alarm {
  std::uint64_t seq = 0;
  AlarmKind kind = AlarmKind::kDivergence;
  std::string reason;
  /// Model-side tip of the event's node, when known.
  std::optional<Hash> expected_tip;
  std::optional<Hash> observed_tip;
  std::string severity;
  Action action = Action::kObserve;
};

std::string_view action_name(Action a);
json to_json(const Alarm& a);

struct IngestResult {
  Conf conf;
  std::optional<Alarm> alarm;
};

/// valid_chain verdicts memoized by tip hash.
using ValidityCache = std::map<Hash, bool>;

/// Replays `ev` on `shadow`. On divergence the alarm is set and `conf` is the
/// unchanged shadow.
IngestResult ingest(const Context& ctx, const Conf& shadow, const MonitorEvent& ev,
                    ValidityCache* cache = nullptr);

/// Stable digest of a configuration: peers, forests, pools, tips and
/// in-flight packets of every node.
Hash state_hash(const Conf& conf);

struct Summary {
  std::size_t events = 0;
  std::size_t divergence_alarms = 0;
  std::size_t parse_alarms = 0;
  Hash end_state;
  double mean_event_us = 0.0;
  double max_event_us = 0.0;

  std::size_t alarms() const { return divergence_alarms + parse_alarms; }
};

json to_json(const Summary& s);

/// Sequential monitor over one trace stream.
class Monitor {
 public:
  explicit Monitor(const sim::SimConfig& config);

  /// One JSON line after the init line. Returns the alarm it raised, if any.
  std::optional<Alarm> ingest_line(std::string_view line);
  std::optional<Alarm> ingest_json(const json& j);

  const Conf& shadow() const { return shadow_; }
  const Context& context() const { return scenario_.ctx; }
  Summary summary() const;

 private:
  std::optional<Alarm> record(std::optional<Alarm> a);

  sim::Scenario scenario_;
  Conf shadow_;
  ValidityCache cache_;
  std::optional<std::uint64_t> last_seq_;
  std::size_t events_ = 0, divergence_ = 0, parse_ = 0;
  double total_us_ = 0.0, max_us_ = 0.0;
};

/// Reads the init line, then every event; alarms go to `sink` as they occur.
/// A missing or malformed init line yields a single parse alarm.
Summary run_monitor(std::istream& trace, const std::function<void(const Alarm&)>& sink);

// ---- fault injection ---------------------------------------------------------

enum class Fault { kDoubleSpend, kUnbalanced, kForgedRangeProof, kBadSignature, kUnknownInput };

std::string_view fault_name(Fault f);
std::optional<Fault> fault_from_name(std::string_view name);
const std::vector<Fault>& all_faults();

struct Injection {
  std::vector<json> lines;
  /// Sequence number of the inserted event.
  std::uint64_t step = 0;
};

/// Inserts one event from a faulty implementation that accepted and relayed
/// an offending payload sent by the environment. The event goes at the first
/// position at or after `min_step` where the fault can be built; later events
/// are renumbered. Throws std::invalid_argument when no position qualifies.
Injection inject_fault(const std::vector<json>& lines, Fault fault, std::uint64_t min_step);

}  // namespace mw::monitor
