#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "mw/codec.hpp"
#include "mw/ledger.hpp"

namespace mw::consensus {

using Addr = std::string;
/// Hex SHA-256 of a canonical serialization.
using Hash = std::string;
/// Stub proof object; accepted by Context::proof_ok.
using ProofObj = std::string;

/// Address used for packets injected from outside the network.
inline const Addr kExternal = "env";

/// Network block: the ledger block wrapped with a parent link and a proof.
struct NodeBlock {
  Hash prev;
  ledger::Block payload;
  ProofObj pf;
};

/// Immutable, hashed, shareable handles. Equality is hash equality.
struct TxRef {
  Hash hash;
  std::shared_ptr<const tx::Transaction> tx;

  friend bool operator==(const TxRef& a, const TxRef& b) { return a.hash == b.hash; }
};

struct BlockRef {
  Hash hash;
  std::shared_ptr<const NodeBlock> block;

  friend bool operator==(const BlockRef& a, const BlockRef& b) { return a.hash == b.hash; }
};

struct ConnectMsg {
  friend bool operator==(const ConnectMsg&, const ConnectMsg&) = default;
};
struct AddrMsg {
  std::set<Addr> addrs;
  friend bool operator==(const AddrMsg&, const AddrMsg&) = default;
};
struct TxMsg {
  TxRef tx;
  friend bool operator==(const TxMsg&, const TxMsg&) = default;
};
struct BlockMsg {
  BlockRef block;
  friend bool operator==(const BlockMsg&, const BlockMsg&) = default;
};
using Msg = std::variant<ConnectMsg, AddrMsg, TxMsg, BlockMsg>;

struct Packet {
  Addr origin;
  Addr dest;
  Msg msg;

  friend bool operator==(const Packet&, const Packet&) = default;
};

/// Total order key: two packets are the same packet iff their keys match.
std::string packet_key(const Packet& p);

/// Set of packets ordered by packet_key.
class PacketSet {
 public:
  PacketSet() = default;
  PacketSet(std::initializer_list<Packet> ps) {
    for (const auto& p : ps) insert(p);
  }

  bool insert(const Packet& p) { return items_.emplace(packet_key(p), p).second; }
  bool erase(const Packet& p) { return items_.erase(packet_key(p)) != 0; }
  bool contains(const Packet& p) const { return items_.count(packet_key(p)) != 0; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  void merge(const PacketSet& other) {
    for (const auto& [k, p] : other.items_) items_.emplace(k, p);
  }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  friend bool operator==(const PacketSet& a, const PacketSet& b) {
    if (a.items_.size() != b.items_.size()) return false;
    for (auto ia = a.items_.begin(), ib = b.items_.begin(); ia != a.items_.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return false;
    }
    return true;
  }

 private:
  std::map<std::string, Packet> items_;
};

/// Node-local state. `bf` holds only blocks validated against their path to
/// genesis; blocks whose parent is still unknown wait in `orphans`.
struct LocState {
  std::set<Addr> as;
  std::map<Hash, BlockRef> bf;
  std::map<Hash, TxRef> tp;
  std::map<Hash, BlockRef> orphans;
};

/// Fixed environment shared by every node of one network.
struct Context {
  tx::Params params;
  BlockRef genesis;
  std::function<bool(const NodeBlock&)> proof_ok = [](const NodeBlock&) { return true; };

  const group::Backend& grp() const { return params.grp(); }
};

/// Parent hash of the genesis block.
inline const Hash kNoParent(64, '0');

Hash hash_of(const tx::Transaction& t, const group::Backend& grp);
Hash hash_of(const NodeBlock& b, const group::Backend& grp);
TxRef make_tx_ref(tx::Transaction t, const group::Backend& grp);
BlockRef make_block_ref(NodeBlock b, const group::Backend& grp);

Context make_context(tx::Params params, const ledger::Block& genesis_payload);
LocState initial_state(const Context& ctx, std::set<Addr> peers = {});

/// Result of an enabled local transition.
struct Outcome {
  LocState state;
  PacketSet out;
};

// Receiving transitions return nullopt when not enabled (wrong destination or
// message kind). A disabled transition changes nothing and emits nothing.
std::optional<Outcome> rcv_addr(const Addr& self, const LocState& st, const Packet& p);
std::optional<Outcome> rcv_connect(const Addr& self, const LocState& st, const Packet& p);
std::optional<Outcome> rcv_tx(const Context& ctx, const Addr& self, const LocState& st,
                              const Packet& p);
std::optional<Outcome> rcv_block(const Context& ctx, const Addr& self, const LocState& st,
                                 const Packet& p);
/// Dispatches on the message kind.
std::optional<Outcome> receive(const Context& ctx, const Addr& self, const LocState& st,
                               const Packet& p);

/// Pool transactions mint_block would include, in canonical (hash) order.
std::vector<TxRef> mintable(const Context& ctx, const LocState& st);
/// Internal transition; nullopt when no pool transaction can be included.
std::optional<Outcome> mint_block(const Context& ctx, const Addr& self, const LocState& st);

/// Longest path from genesis in `bf`; ties go to the smallest tip hash.
std::vector<BlockRef> best_path(const LocState& st);
ledger::Chain best_chain(const LocState& st);
Hash best_tip(const LocState& st);

/// Path genesis..tip, or empty when `tip` is not in `bf`.
std::vector<BlockRef> path_to(const LocState& st, const Hash& tip);

/// Global configuration. `delivered` remembers every packet that left the
/// in-flight set; emitting such a packet again is coalesced away.
struct Conf {
  std::map<Addr, LocState> delta;
  PacketSet packets;
  std::set<std::string> delivered;
};

/// Adds `out` to the in-flight set except packets already in flight or
/// already delivered.
void emit(Conf& conf, const PacketSet& out);

enum class EventKind { kDeliver, kMint };

/// An enabled global event.
struct Event {
  EventKind kind;
  Addr node;
  std::optional<Packet> packet;
};

/// Deliverable packets in key order, then nodes able to mint in address order.
std::vector<Event> enabled_events(const Context& ctx, const Conf& conf);

/// What one global step did.
struct StepRecord {
  std::string transition;  // rcvAddr, rcvConnect, rcvTx, rcvBlock, mintBlock, drop
  Addr node;
  std::optional<Packet> in;
  bool duplicated = false;
  PacketSet out;
  Hash tip;
};

std::string transition_name(const Msg& m);

/// Applies one delivery or mint. `lost` drops a packet without delivering it;
/// `duplicated` delivers it but leaves a copy in flight.
StepRecord apply_event(const Context& ctx, Conf& conf, const Event& ev, bool lost = false,
                       bool duplicated = false);

// ---- JSON -------------------------------------------------------------------

codec::json to_json(const NodeBlock& b, const group::Backend& grp);
NodeBlock node_block_from_json(const codec::json& j, const group::Backend& grp);
codec::json to_json(const Packet& p, const group::Backend& grp);
Packet packet_from_json(const codec::json& j, const group::Backend& grp);
codec::json to_json(const PacketSet& ps, const group::Backend& grp);
PacketSet packet_set_from_json(const codec::json& j, const group::Backend& grp);

}  // namespace mw::consensus
