#include "mw/consensus.hpp"

#include <algorithm>

#include "mw/hash.hpp"

namespace mw::consensus {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

Hash digest_hex(std::string_view domain, const group::Backend& grp, const codec::json& j) {
  Hasher h(domain);
  h.update_framed(as_bytes(grp.id()));
  h.update(j.dump());
  auto d = h.finish();
  return to_hex(ByteView(d.data(), d.size()));
}

ledger::ChainState replay(const Context& ctx, const std::vector<BlockRef>& path) {
  ledger::ChainState state(ctx.params);
  for (const auto& b : path) state.apply(b.block->payload);
  return state;
}

bool has_kernel(const ledger::Block& b, const tx::TxKernel& k) {
  return std::find(b.kernels.begin(), b.kernels.end(), k) != b.kernels.end();
}

// A pool transaction is confirmed by a block carrying all of its kernels.
void drop_confirmed(LocState& st, const ledger::Block& b) {
  for (auto it = st.tp.begin(); it != st.tp.end();) {
    const auto& ks = it->second.tx->kernels;
    bool confirmed = !ks.empty() && std::all_of(ks.begin(), ks.end(),
                                                [&](const tx::TxKernel& k) { return has_kernel(b, k); });
    it = confirmed ? st.tp.erase(it) : std::next(it);
  }
}

void broadcast(PacketSet& out, const Addr& self, const std::set<Addr>& to, const Msg& m) {
  for (const auto& a : to) out.insert({self, a, m});
}

// Validates `b` against the path ending at its parent, which must be in bf.
bool extends_validly(const Context& ctx, const LocState& st, const NodeBlock& b) {
  if (!ctx.proof_ok(b)) return false;
  auto path = path_to(st, b.prev);
  if (path.empty()) return false;
  auto state = replay(ctx, path);
  return state.append(b.payload).ok();
}

void adopt(LocState& st, const BlockRef& ref) {
  st.bf.emplace(ref.hash, ref);
  drop_confirmed(st, ref.block->payload);
}

}  // namespace

std::string packet_key(const Packet& p) {
  std::string key = p.origin + '\x1f' + p.dest + '\x1f';
  std::visit(Overloaded{
                 [&](const ConnectMsg&) { key += "connect"; },
                 [&](const AddrMsg& m) {
                   key += "addr\x1f";
                   for (const auto& a : m.addrs) key += a + '\x1e';
                 },
                 [&](const TxMsg& m) { key += "tx\x1f" + m.tx.hash; },
                 [&](const BlockMsg& m) { key += "block\x1f" + m.block.hash; },
             },
             p.msg);
  return key;
}

Hash hash_of(const tx::Transaction& t, const group::Backend& grp) {
  return digest_hex("mw/consensus/tx", grp, codec::to_json(t, grp));
}

Hash hash_of(const NodeBlock& b, const group::Backend& grp) {
  return digest_hex("mw/consensus/block", grp, to_json(b, grp));
}

TxRef make_tx_ref(tx::Transaction t, const group::Backend& grp) {
  Hash h = hash_of(t, grp);
  return {std::move(h), std::make_shared<const tx::Transaction>(std::move(t))};
}

BlockRef make_block_ref(NodeBlock b, const group::Backend& grp) {
  Hash h = hash_of(b, grp);
  return {std::move(h), std::make_shared<const NodeBlock>(std::move(b))};
}

Context make_context(tx::Params params, const ledger::Block& genesis_payload) {
  Context ctx;
  ctx.params = std::move(params);
  ctx.genesis = make_block_ref(NodeBlock{kNoParent, genesis_payload, "genesis"}, ctx.grp());
  return ctx;
}

LocState initial_state(const Context& ctx, std::set<Addr> peers) {
  LocState st;
  st.as = std::move(peers);
  st.bf.emplace(ctx.genesis.hash, ctx.genesis);
  return st;
}

// ---- receiving transitions ---------------------------------------------------

std::optional<Outcome> rcv_addr(const Addr& self, const LocState& st, const Packet& p) {
  const auto* m = std::get_if<AddrMsg>(&p.msg);
  if (p.dest != self || m == nullptr) return std::nullopt;
  Outcome r{st, {}};
  r.state.as.insert(m->addrs.begin(), m->addrs.end());
  for (const auto& a : m->addrs) {
    if (!st.as.count(a)) r.out.insert({self, a, ConnectMsg{}});
  }
  broadcast(r.out, self, st.as, AddrMsg{r.state.as});
  return r;
}

std::optional<Outcome> rcv_connect(const Addr& self, const LocState& st, const Packet& p) {
  if (p.dest != self || !std::holds_alternative<ConnectMsg>(p.msg)) return std::nullopt;
  Outcome r{st, {}};
  r.state.as.insert(p.origin);
  r.out.insert({self, p.origin, AddrMsg{r.state.as}});
  return r;
}

std::optional<Outcome> rcv_tx(const Context& ctx, const Addr& self, const LocState& st,
                              const Packet& p) {
  const auto* m = std::get_if<TxMsg>(&p.msg);
  if (p.dest != self || m == nullptr) return std::nullopt;
  Outcome r{st, {}};
  if (st.tp.count(m->tx.hash)) return r;
  const auto& t = *m->tx.tx;
  if (!tx::validate_transaction(t, ctx.params)) return r;
  auto utxo = replay(ctx, best_path(st)).utxo();
  for (const auto& in : t.inputs) {
    if (!utxo.remove(in.commitment)) return r;
  }
  r.state.tp.emplace(m->tx.hash, m->tx);
  broadcast(r.out, self, st.as, *m);
  return r;
}

std::optional<Outcome> rcv_block(const Context& ctx, const Addr& self, const LocState& st,
                                 const Packet& p) {
  const auto* m = std::get_if<BlockMsg>(&p.msg);
  if (p.dest != self || m == nullptr) return std::nullopt;
  Outcome r{st, {}};
  const auto& ref = m->block;
  if (st.bf.count(ref.hash) || st.orphans.count(ref.hash)) return r;
  LocState& s = r.state;
  if (!s.bf.count(ref.block->prev)) {
    s.orphans.emplace(ref.hash, ref);
    return r;
  }
  if (!extends_validly(ctx, s, *ref.block)) return r;
  adopt(s, ref);
  broadcast(r.out, self, s.as, BlockMsg{ref});

  // Orphans whose parent just arrived are judged now; invalid ones are dropped.
  for (bool progress = true; progress;) {
    progress = false;
    for (auto it = s.orphans.begin(); it != s.orphans.end(); ++it) {
      if (!s.bf.count(it->second.block->prev)) continue;
      BlockRef orphan = it->second;
      s.orphans.erase(it);
      if (extends_validly(ctx, s, *orphan.block)) {
        adopt(s, orphan);
        broadcast(r.out, self, s.as, BlockMsg{orphan});
      }
      progress = true;
      break;
    }
  }
  return r;
}

std::optional<Outcome> receive(const Context& ctx, const Addr& self, const LocState& st,
                               const Packet& p) {
  return std::visit(Overloaded{
                        [&](const ConnectMsg&) { return rcv_connect(self, st, p); },
                        [&](const AddrMsg&) { return rcv_addr(self, st, p); },
                        [&](const TxMsg&) { return rcv_tx(ctx, self, st, p); },
                        [&](const BlockMsg&) { return rcv_block(ctx, self, st, p); },
                    },
                    p.msg);
}

// ---- minting and fork choice -------------------------------------------------

std::vector<TxRef> mintable(const Context& ctx, const LocState& st) {
  std::vector<TxRef> chosen;
  if (st.tp.empty()) return chosen;
  auto utxo = replay(ctx, best_path(st)).utxo();
  for (const auto& [hash, ref] : st.tp) {
    auto trial = utxo;
    bool ok = true;
    for (const auto& in : ref.tx->inputs) ok = ok && trial.remove(in.commitment);
    if (!ok) continue;
    utxo = std::move(trial);
    chosen.push_back(ref);
  }
  return chosen;
}

std::optional<Outcome> mint_block(const Context& ctx, const Addr& self, const LocState& st) {
  auto chosen = mintable(ctx, st);
  if (chosen.empty()) return std::nullopt;
  std::vector<tx::Transaction> txs;
  for (const auto& t : chosen) txs.push_back(*t.tx);
  NodeBlock b{best_tip(st), ledger::aggregate(txs, ctx.grp().scalar(0), ctx.params), self};
  auto ref = make_block_ref(std::move(b), ctx.grp());
  Outcome r{st, {}};
  adopt(r.state, ref);
  broadcast(r.out, self, st.as, BlockMsg{ref});
  return r;
}

std::vector<BlockRef> path_to(const LocState& st, const Hash& tip) {
  std::vector<BlockRef> path;
  Hash cur = tip;
  while (cur != kNoParent) {
    auto it = st.bf.find(cur);
    if (it == st.bf.end()) return {};
    path.push_back(it->second);
    cur = it->second.block->prev;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<BlockRef> best_path(const LocState& st) {
  std::map<Hash, std::size_t> height;
  std::function<std::size_t(const Hash&)> depth = [&](const Hash& h) -> std::size_t {
    if (h == kNoParent) return 0;
    if (auto it = height.find(h); it != height.end()) return it->second;
    auto b = st.bf.find(h);
    if (b == st.bf.end()) return 0;
    std::size_t d = 1 + depth(b->second.block->prev);
    height[h] = d;
    return d;
  };
  const Hash* best = nullptr;
  std::size_t best_height = 0;
  // Ascending key order makes the first maximum the smallest tip hash.
  for (const auto& [h, ref] : st.bf) {
    std::size_t d = depth(h);
    if (d > best_height) {
      best_height = d;
      best = &h;
    }
  }
  return best ? path_to(st, *best) : std::vector<BlockRef>{};
}

ledger::Chain best_chain(const LocState& st) {
  ledger::Chain c;
  for (const auto& b : best_path(st)) c.blocks.push_back(b.block->payload);
  return c;
}

Hash best_tip(const LocState& st) {
  auto path = best_path(st);
  return path.empty() ? kNoParent : path.back().hash;
}

// ---- global step -------------------------------------------------------------

void emit(Conf& conf, const PacketSet& out) {
  for (const auto& [key, p] : out) {
    if (!conf.delivered.count(key)) conf.packets.insert(p);
  }
}

std::vector<Event> enabled_events(const Context& ctx, const Conf& conf) {
  std::vector<Event> evs;
  for (const auto& [key, p] : conf.packets) {
    if (conf.delta.count(p.dest)) evs.push_back({EventKind::kDeliver, p.dest, p});
  }
  for (const auto& [addr, st] : conf.delta) {
    if (!mintable(ctx, st).empty()) evs.push_back({EventKind::kMint, addr, std::nullopt});
  }
  return evs;
}

std::string transition_name(const Msg& m) {
  return std::visit(Overloaded{
                        [](const ConnectMsg&) { return std::string("rcvConnect"); },
                        [](const AddrMsg&) { return std::string("rcvAddr"); },
                        [](const TxMsg&) { return std::string("rcvTx"); },
                        [](const BlockMsg&) { return std::string("rcvBlock"); },
                    },
                    m);
}

StepRecord apply_event(const Context& ctx, Conf& conf, const Event& ev, bool lost,
                       bool duplicated) {
  auto node = conf.delta.find(ev.node);
  if (node == conf.delta.end()) throw std::invalid_argument("unknown node " + ev.node);
  StepRecord rec;
  rec.node = ev.node;
  if (ev.kind == EventKind::kMint) {
    auto r = mint_block(ctx, ev.node, node->second);
    if (!r) throw std::logic_error("mintBlock is not enabled at " + ev.node);
    rec.transition = "mintBlock";
    node->second = std::move(r->state);
    rec.out = std::move(r->out);
  } else {
    const Packet& p = *ev.packet;
    rec.in = p;
    rec.duplicated = duplicated && !lost;
    if (!rec.duplicated) {
      conf.packets.erase(p);
      conf.delivered.insert(packet_key(p));
    }
    if (lost) {
      rec.transition = "drop";
    } else {
      auto r = receive(ctx, ev.node, node->second, p);
      if (!r) throw std::logic_error("no transition enabled for packet at " + ev.node);
      rec.transition = transition_name(p.msg);
      node->second = std::move(r->state);
      rec.out = std::move(r->out);
    }
  }
  emit(conf, rec.out);
  rec.tip = best_tip(node->second);
  return rec;
}

// ---- JSON --------------------------------------------------------------------

codec::json to_json(const NodeBlock& b, const group::Backend& grp) {
  return {{"prev", b.prev}, {"pf", b.pf}, {"payload", codec::to_json(b.payload, grp)}};
}

NodeBlock node_block_from_json(const codec::json& j, const group::Backend& grp) {
  if (!j.is_object() || !j.contains("prev") || !j.contains("pf") || !j.contains("payload") ||
      !j["prev"].is_string() || !j["pf"].is_string()) {
    throw DecodeError("node block needs string 'prev', string 'pf' and 'payload'");
  }
  return {j["prev"].get<std::string>(), codec::block_from_json(j["payload"], grp),
          j["pf"].get<std::string>()};
}

codec::json to_json(const Packet& p, const group::Backend& grp) {
  codec::json msg = std::visit(
      Overloaded{
          [](const ConnectMsg&) { return codec::json{{"kind", "connect"}}; },
          [](const AddrMsg& m) { return codec::json{{"kind", "addr"}, {"addrs", m.addrs}}; },
          [&](const TxMsg& m) { return codec::json{{"kind", "tx"}, {"tx", codec::to_json(*m.tx.tx, grp)}}; },
          [&](const BlockMsg& m) {
            return codec::json{{"kind", "block"}, {"block", to_json(*m.block.block, grp)}};
          },
      },
      p.msg);
  return {{"origin", p.origin}, {"dest", p.dest}, {"msg", msg}};
}

Packet packet_from_json(const codec::json& j, const group::Backend& grp) {
  auto str = [&](const codec::json& o, const char* key) {
    if (!o.is_object() || !o.contains(key) || !o[key].is_string()) {
      throw DecodeError(std::string("packet needs string field '") + key + "'");
    }
    return o[key].get<std::string>();
  };
  Packet p;
  p.origin = str(j, "origin");
  p.dest = str(j, "dest");
  if (!j.contains("msg")) throw DecodeError("packet needs field 'msg'");
  const auto& m = j["msg"];
  std::string kind = str(m, "kind");
  if (kind == "connect") {
    p.msg = ConnectMsg{};
  } else if (kind == "addr") {
    if (!m.contains("addrs") || !m["addrs"].is_array()) throw DecodeError("addr message needs 'addrs'");
    AddrMsg a;
    for (const auto& e : m["addrs"]) {
      if (!e.is_string()) throw DecodeError("addresses must be strings");
      a.addrs.insert(e.get<std::string>());
    }
    p.msg = std::move(a);
  } else if (kind == "tx") {
    if (!m.contains("tx")) throw DecodeError("tx message needs 'tx'");
    p.msg = TxMsg{make_tx_ref(codec::transaction_from_json(m["tx"], grp), grp)};
  } else if (kind == "block") {
    if (!m.contains("block")) throw DecodeError("block message needs 'block'");
    p.msg = BlockMsg{make_block_ref(node_block_from_json(m["block"], grp), grp)};
  } else {
    throw DecodeError("unknown message kind '" + kind + "'");
  }
  return p;
}

codec::json to_json(const PacketSet& ps, const group::Backend& grp) {
  codec::json out = codec::json::array();
  for (const auto& [key, p] : ps) out.push_back(to_json(p, grp));
  return out;
}

PacketSet packet_set_from_json(const codec::json& j, const group::Backend& grp) {
  if (!j.is_array()) throw DecodeError("packet set must be an array");
  PacketSet ps;
  for (const auto& e : j) ps.insert(packet_from_json(e, grp));
  return ps;
}

}  // namespace mw::consensus
