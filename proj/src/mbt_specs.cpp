#include "mw/mbt/specs.hpp"

namespace mw::mbt {

using consensus::Addr;
using consensus::AddrMsg;
using consensus::ConnectMsg;
using consensus::LocState;
using consensus::Outcome;
using consensus::Packet;

namespace {

const std::vector<Atom> kPeers{"a1", "a2", "a3", "this"};
const Addr kSelf = "this";

ExprPtr v(const char* n) { return var(n); }

std::vector<VarDecl> peer_outputs() {
  return {set_var("as'", Role::kOutput, kPeers),   set_var("connect_to", Role::kOutput, kPeers),
          set_var("addr_to", Role::kOutput, kPeers), set_var("payload", Role::kOutput, kPeers),
          bool_var("enabled", Role::kOutput),        bool_var("uniform", Role::kOutput),
          bool_var("well_formed", Role::kOutput),    bool_var("frame", Role::kOutput)};
}

ExprPtr is_true(const char* n) { return eq(v(n), truth()); }

// ---- peer adapter -------------------------------------------------------------

class PeerAdapter : public SutAdapter {
 public:
  PeerAdapter(std::string name, PeerFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  std::string name() const override { return name_; }

  Binding execute(const Binding& c) override {
    // Refinement: fixed self, placeholder forest and pool entries that a
    // peer-management transition must leave alone.
    LocState st;
    st.as = std::get<AtomSet>(c.at("as"));
    st.bf.emplace("b0", consensus::BlockRef{"b0", nullptr});
    st.tp.emplace("t0", consensus::TxRef{"t0", nullptr});
    Packet p{std::get<Atom>(c.at("origin")), std::get<Atom>(c.at("dest")), ConnectMsg{}};
    if (std::get<Atom>(c.at("kind")) == "addr") {
      auto it = c.find("asm");
      p.msg = AddrMsg{it == c.end() ? AtomSet{} : std::get<AtomSet>(it->second)};
    }

    auto r = fn_(kSelf, st, p);

    // Abstraction.
    Binding o;
    o["enabled"] = r.has_value();
    const LocState& after = r ? r->state : st;
    o["as'"] = AtomSet(after.as.begin(), after.as.end());
    AtomSet connect_to, addr_to;
    std::set<AtomSet> payloads;
    bool well_formed = true;
    if (r) {
      for (const auto& [key, q] : r->out) {
        well_formed = well_formed && q.origin == kSelf;
        if (std::holds_alternative<ConnectMsg>(q.msg)) {
          connect_to.insert(q.dest);
        } else if (const auto* m = std::get_if<AddrMsg>(&q.msg)) {
          addr_to.insert(q.dest);
          payloads.insert(AtomSet(m->addrs.begin(), m->addrs.end()));
        } else {
          well_formed = false;
        }
      }
    }
    o["connect_to"] = connect_to;
    o["addr_to"] = addr_to;
    o["uniform"] = payloads.size() <= 1;
    o["payload"] = payloads.size() == 1 ? *payloads.begin() : AtomSet{};
    o["well_formed"] = well_formed;
    auto keys = [](const auto& m) {
      std::set<std::string> ks;
      for (const auto& kv : m) ks.insert(kv.first);
      return ks;
    };
    o["frame"] = keys(after.bf) == keys(st.bf) && keys(after.tp) == keys(st.tp) &&
                 after.orphans.size() == st.orphans.size();
    return o;
  }

 private:
  std::string name_;
  PeerFn fn_;
};

// ---- validate adapter ---------------------------------------------------------

std::string verdict_atom(Reason r) {
  switch (r) {
    case Reason::kValid: return "valid";
    case Reason::kRangeProof: return "range";
    case Reason::kKernelSignature: return "sig";
    case Reason::kUnbalanced: return "unbalanced";
    case Reason::kDuplicateInput: return "dup";
    default: return std::string(reason_name(r));
  }
}

class ValidateAdapter : public SutAdapter {
 public:
  ValidateAdapter(std::string name, ValidateFn fn)
      : name_(std::move(name)), fn_(std::move(fn)), params_(tx::Params::with(group::make_transparent(), 4)) {}

  std::string name() const override { return name_; }

  Binding execute(const Binding& c) override {
    const auto& grp = params_.grp();
    const auto& ins = std::get<AtomSet>(c.at("ins"));
    const auto nout = std::get<std::int64_t>(c.at("nout"));
    const auto& tamper = std::get<Atom>(c.at("tamper"));
    const auto amount = static_cast<std::uint64_t>(std::get<std::int64_t>(c.at("amount")));

    // Refinement: coin ck has blinding 10+k and value `amount`; outputs split
    // the total as evenly as possible under blindings 21, 22.
    std::vector<tx::Opening> spends;
    for (const auto& a : ins) {
      spends.push_back({grp.scalar(10 + std::stoull(a.substr(1))), grp.scalar(amount)});
    }
    const std::uint64_t total = amount * ins.size();
    std::vector<tx::Opening> outs;
    for (std::int64_t i = 0; i < nout; ++i) {
      std::uint64_t share = i + 1 == nout ? total - total / 2 * (nout - 1) : total / 2;
      outs.push_back({grp.scalar(21 + static_cast<std::uint64_t>(i)), grp.scalar(share)});
    }
    auto t = tx::build_transaction(params_, spends, outs);

    if (tamper == "range") {
      // Proof of a different value for the first output.
      const auto& o = *t.outputs[0].opening;
      auto other = grp.scalar((o.value.value() + 1) % 16);
      t.kernels[0].range_proofs[0] = crypto::prove_range(grp, o.blinding, other, params_.range_bits);
    } else if (tamper == "sig") {
      t.kernels[0].signature.response += grp.scalar(1);
    } else if (tamper == "balance") {
      // One unit from thin air, properly range-proved, kernel untouched.
      tx::Opening o = *t.outputs[0].opening;
      o.value += grp.scalar(1);
      t.outputs[0].commitment = crypto::commit(grp, o.blinding, o.value);
      t.kernels[0].range_proofs[0] = crypto::prove_range(grp, o.blinding, o.value, params_.range_bits);
    } else if (tamper == "dup") {
      t.inputs.push_back(t.inputs[0]);
    }

    return {{"verdict", verdict_atom(fn_(t, params_).reason)}};
  }

 private:
  std::string name_;
  ValidateFn fn_;
  tx::Params params_;
};

// ---- mutants ------------------------------------------------------------------

std::optional<Outcome> no_relay(const Addr& self, const LocState& st, const Packet& p) {
  auto r = consensus::rcv_addr(self, st, p);
  if (!r) return r;
  consensus::PacketSet kept;
  for (const auto& [key, q] : r->out) {
    if (!std::holds_alternative<AddrMsg>(q.msg)) kept.insert(q);
  }
  r->out = kept;
  return r;
}

std::optional<Outcome> connect_all(const Addr& self, const LocState& st, const Packet& p) {
  auto r = consensus::rcv_addr(self, st, p);
  if (!r) return r;
  for (const auto& a : std::get<AddrMsg>(p.msg).addrs) r->out.insert({self, a, ConnectMsg{}});
  return r;
}

std::optional<Outcome> stale_payload(const Addr& self, const LocState& st, const Packet& p) {
  auto r = consensus::rcv_addr(self, st, p);
  if (!r) return r;
  consensus::PacketSet out;
  for (const auto& [key, q] : r->out) {
    if (std::holds_alternative<AddrMsg>(q.msg)) {
      out.insert({q.origin, q.dest, AddrMsg{st.as}});
    } else {
      out.insert(q);
    }
  }
  r->out = out;
  return r;
}

Verdict first_failure(std::initializer_list<std::function<Verdict()>> checks) {
  for (const auto& c : checks) {
    auto v = c();
    if (!v.ok()) return v;
  }
  return Verdict::valid();
}

Verdict skip_range(const tx::Transaction& t, const tx::Params& p) {
  return first_failure({[&] { return tx::detail::check_duplicate_inputs(t.inputs); },
                        [&] { return tx::detail::check_signatures(t.kernels, p); },
                        [&] { return tx::detail::check_balance(t, p); }});
}

Verdict skip_dup(const tx::Transaction& t, const tx::Params& p) {
  return first_failure({[&] { return tx::detail::check_range_proofs(t.outputs, t.kernels, p, true); },
                        [&] { return tx::detail::check_signatures(t.kernels, p); },
                        [&] { return tx::detail::check_balance(t, p); }});
}

Verdict skip_balance(const tx::Transaction& t, const tx::Params& p) {
  return first_failure({[&] { return tx::detail::check_duplicate_inputs(t.inputs); },
                        [&] { return tx::detail::check_range_proofs(t.outputs, t.kernels, p, true); },
                        [&] { return tx::detail::check_signatures(t.kernels, p); }});
}

}  // namespace

// ---- specs --------------------------------------------------------------------

TransitionSpec rcv_addr_spec() {
  TransitionSpec s;
  s.name = "rcv_addr";
  s.vars = {atom_var("origin", Role::kInput, {"a1", "a2", "a3"}),
            atom_var("dest", Role::kInput, {"this", "a1"}),
            atom_var("kind", Role::kInput, {"addr", "connect"}),
            set_var("asm", Role::kInput, kPeers),
            set_var("as", Role::kState, kPeers)};
  s.outputs = peer_outputs();
  s.pre = and_({eq(v("dest"), atom(kSelf)), eq(v("kind"), atom("addr"))});
  s.post = and_({is_true("enabled"),
                 eq(v("as'"), union_(v("as"), v("asm"))),
                 eq(v("connect_to"), diff(v("asm"), v("as"))),
                 eq(v("addr_to"), v("as")),
                 or_({eq(v("addr_to"), empty_set()), and_({is_true("uniform"), eq(v("payload"), v("as'"))})}),
                 is_true("well_formed"),
                 is_true("frame")});
  return s;
}

TransitionSpec rcv_connect_spec() {
  TransitionSpec s;
  s.name = "rcv_connect";
  s.vars = {atom_var("origin", Role::kInput, {"a1", "a2", "a3"}),
            atom_var("dest", Role::kInput, {"this", "a1"}),
            atom_var("kind", Role::kInput, {"addr", "connect"}),
            set_var("as", Role::kState, kPeers)};
  s.outputs = peer_outputs();
  s.pre = and_({eq(v("dest"), atom(kSelf)), eq(v("kind"), atom("connect"))});
  s.post = and_({is_true("enabled"),
                 eq(v("as'"), union_(v("as"), singleton(v("origin")))),
                 eq(v("connect_to"), empty_set()),
                 eq(v("addr_to"), singleton(v("origin"))),
                 is_true("uniform"),
                 eq(v("payload"), v("as'")),
                 is_true("well_formed"),
                 is_true("frame")});
  return s;
}

TransitionSpec validate_transaction_spec() {
  TransitionSpec s;
  s.name = "validate_transaction";
  s.vars = {set_var("ins", Role::kInput, {"c1", "c2", "c3"}),
            int_var("nout", Role::kInput, 0, 2),
            atom_var("tamper", Role::kInput, {"none", "range", "sig", "balance", "dup"}),
            int_var("amount", Role::kState, 0, 3)};
  s.outputs = {atom_var("verdict", Role::kOutput, {"valid", "range", "sig", "unbalanced", "dup"})};
  auto tamper = [](const char* t) { return eq(v("tamper"), atom(t)); };
  auto verdict = [](const char* r) { return eq(v("verdict"), atom(r)); };
  s.pre = and_({implies(eq(v("nout"), integer(0)), or_({eq(v("ins"), empty_set()), eq(v("amount"), integer(0))})),
                implies(tamper("range"), ge(v("nout"), integer(1))),
                implies(tamper("balance"), ge(v("nout"), integer(1))),
                implies(tamper("dup"), ne(v("ins"), empty_set()))});
  s.post = and_({implies(tamper("none"), verdict("valid")),
                 implies(tamper("range"), verdict("range")),
                 implies(tamper("sig"), verdict("sig")),
                 implies(tamper("balance"), verdict("unbalanced")),
                 implies(tamper("dup"), verdict("dup"))});
  return s;
}

// ---- registry -----------------------------------------------------------------

std::vector<std::string> transitions() { return {"rcv_addr", "rcv_connect", "validate_transaction"}; }

TransitionSpec spec_for(const std::string& t) {
  if (t == "rcv_addr") return rcv_addr_spec();
  if (t == "rcv_connect") return rcv_connect_spec();
  if (t == "validate_transaction") return validate_transaction_spec();
  throw std::invalid_argument("unknown transition '" + t + "'");
}

std::vector<Tactic> default_schedule(const std::string& t) {
  std::vector<std::string> labels;
  if (t == "rcv_addr") {
    labels = {"dnf", "set-extension:as", "set-extension:asm", "membership:origin:as"};
  } else if (t == "rcv_connect") {
    labels = {"dnf", "set-extension:as", "membership:origin:as"};
  } else if (t == "validate_transaction") {
    labels = {"free-type:tamper", "set-extension:ins", "boundary:nout"};
  } else {
    throw std::invalid_argument("unknown transition '" + t + "'");
  }
  std::vector<Tactic> out;
  for (const auto& l : labels) out.push_back(Tactic::parse(l));
  return out;
}

std::vector<std::string> suts(const std::string& t) {
  if (t == "rcv_addr") return {"model", "no-relay", "connect-all", "stale-payload"};
  if (t == "rcv_connect") return {"model"};
  if (t == "validate_transaction") return {"model", "skip-range", "skip-dup", "skip-balance"};
  throw std::invalid_argument("unknown transition '" + t + "'");
}

std::unique_ptr<SutAdapter> peer_adapter(std::string name, PeerFn fn) {
  return std::make_unique<PeerAdapter>(std::move(name), std::move(fn));
}

std::unique_ptr<SutAdapter> validate_adapter(std::string name, ValidateFn fn) {
  return std::make_unique<ValidateAdapter>(std::move(name), std::move(fn));
}

std::unique_ptr<SutAdapter> make_adapter(const std::string& t, const std::string& sut) {
  if (t == "rcv_addr") {
    if (sut == "model") return peer_adapter(sut, consensus::rcv_addr);
    if (sut == "no-relay") return peer_adapter(sut, no_relay);
    if (sut == "connect-all") return peer_adapter(sut, connect_all);
    if (sut == "stale-payload") return peer_adapter(sut, stale_payload);
  } else if (t == "rcv_connect") {
    if (sut == "model") return peer_adapter(sut, consensus::rcv_connect);
  } else if (t == "validate_transaction") {
    if (sut == "model") return validate_adapter(sut, tx::validate_transaction);
    if (sut == "skip-range") return validate_adapter(sut, skip_range);
    if (sut == "skip-dup") return validate_adapter(sut, skip_dup);
    if (sut == "skip-balance") return validate_adapter(sut, skip_balance);
  } else {
    throw std::invalid_argument("unknown transition '" + t + "'");
  }
  throw std::invalid_argument("no SUT '" + sut + "' for " + t);
}

Suite make_suite(const TransitionSpec& spec, const std::vector<Tactic>& schedule, std::size_t budget,
                 unsigned jobs) {
  auto tree = vis(spec);
  Suite s{spec.name, {}, budget, {}};
  for (const auto& t : schedule) {
    tree.apply_to_leaves(t);
    s.tactics.push_back(t.label());
  }
  prune(tree, budget, jobs);
  s.cases = generate_cases(tree);
  return s;
}

}  // namespace mw::mbt
