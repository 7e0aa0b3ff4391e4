#include "mw/ledger.hpp"

#include <algorithm>
#include <set>

namespace mw::ledger {

// ---- UtxoSet ---------------------------------------------------------------

void UtxoSet::add(const crypto::Commitment& c) {
  auto& e = entries_[c.serialize()];
  e.commitment = c;
  ++e.count;
  ++size_;
}

bool UtxoSet::remove(const crypto::Commitment& c) {
  auto it = entries_.find(c.serialize());
  if (it == entries_.end()) return false;
  if (--it->second.count == 0) entries_.erase(it);
  --size_;
  return true;
}

std::size_t UtxoSet::count(const crypto::Commitment& c) const {
  auto it = entries_.find(c.serialize());
  return it == entries_.end() ? 0 : it->second.count;
}

std::vector<crypto::Commitment> UtxoSet::commitments() const {
  std::vector<crypto::Commitment> out;
  out.reserve(size_);
  for (const auto& [key, e] : entries_) {
    for (std::size_t i = 0; i < e.count; ++i) out.push_back(e.commitment);
  }
  return out;
}

bool operator==(const UtxoSet& a, const UtxoSet& b) {
  if (a.size_ != b.size_ || a.entries_.size() != b.entries_.size()) return false;
  for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.count != ib->second.count) return false;
  }
  return true;
}

// ---- construction ----------------------------------------------------------

Block make_genesis(const Params& params, std::span<const Opening> outputs) {
  const auto& grp = params.grp();
  Block b;
  b.genesis = true;
  b.offset = grp.scalar(0);
  Scalar secret = grp.scalar(0);
  TxKernel kernel;
  for (const auto& o : outputs) {
    b.supply += o.value.value();
    secret += o.blinding;
    kernel.range_proofs.push_back(params.prover->prove(grp, o.blinding, o.value, params.range_bits));
    b.outputs.push_back({crypto::commit(grp, o.blinding, o.value), o});
  }
  kernel.excess = secret * grp.g();
  kernel.signature = crypto::sign(grp, secret, params.kernel_message);
  kernel.secret = secret;
  b.kernels.push_back(std::move(kernel));
  std::sort(b.outputs.begin(), b.outputs.end(),
            [](const Coin& x, const Coin& y) { return crypto::canonical_less(x.commitment, y.commitment); });
  return b;
}

Block aggregate(std::span<const Transaction> txs, const Scalar& offset, const Params& params) {
  const auto& grp = params.grp();
  grp.check_scalar(offset);
  Block b;
  b.offset = offset;
  std::set<Bytes> spent;
  for (std::size_t i = 0; i < txs.size(); ++i) {
    if (auto v = tx::validate_transaction(txs[i], params); !v) {
      throw AggregateError("transaction " + std::to_string(i) + " is " + v.to_string());
    }
    for (const auto& in : txs[i].inputs) {
      if (!spent.insert(in.commitment.serialize()).second) {
        throw ConflictError("transaction " + std::to_string(i) + " spends input " +
                            in.commitment.hex() + " already spent by another transaction");
      }
    }
    b.inputs.insert(b.inputs.end(), txs[i].inputs.begin(), txs[i].inputs.end());
    b.outputs.insert(b.outputs.end(), txs[i].outputs.begin(), txs[i].outputs.end());
    b.kernels.insert(b.kernels.end(), txs[i].kernels.begin(), txs[i].kernels.end());
  }

  if (!offset.is_zero()) {
    auto it = std::find_if(b.kernels.begin(), b.kernels.end(),
                           [](const TxKernel& k) { return k.secret.has_value(); });
    if (it == b.kernels.end()) {
      throw AggregateError("non-zero offset needs a kernel whose secret is known");
    }
    Scalar shifted = *it->secret - offset;
    it->excess = shifted * grp.g();
    it->signature = crypto::sign(grp, shifted, params.kernel_message);
    it->secret = shifted;
  }

  auto by_commitment = [](const Coin& x, const Coin& y) {
    return crypto::canonical_less(x.commitment, y.commitment);
  };
  std::sort(b.inputs.begin(), b.inputs.end(), by_commitment);
  std::sort(b.outputs.begin(), b.outputs.end(), by_commitment);
  std::sort(b.kernels.begin(), b.kernels.end(), [](const TxKernel& x, const TxKernel& y) {
    return x.excess.serialize() < y.excess.serialize();
  });
  return b;
}

// ---- validation ------------------------------------------------------------

Verdict validate_block(const Block& b, const Params& params) {
  const auto& grp = params.grp();
  try {
    if (b.genesis && !b.inputs.empty()) {
      return Verdict::invalid(Reason::kGenesis, std::nullopt, "genesis block spends inputs");
    }
    if (!b.genesis && b.supply != 0) {
      return Verdict::invalid(Reason::kGenesis, std::nullopt, "only genesis may mint supply");
    }
    if (auto v = tx::detail::check_duplicate_inputs(b.inputs); !v) return v;
    grp.check_scalar(b.offset);
    Point lhs = (tx::sum(b.outputs, grp) - tx::sum(b.inputs, grp)).point;
    Point rhs = b.offset * grp.g() + grp.scalar(b.supply) * grp.h();
    for (const auto& k : b.kernels) rhs += k.excess;
    if (!(lhs == rhs)) {
      return Verdict::invalid(Reason::kBalanceEquation, std::nullopt,
                              "outputs minus inputs differ from offset·G + kernel excesses");
    }
    if (auto v = tx::detail::check_range_proofs(b.outputs, b.kernels, params, false); !v) return v;
    if (auto v = tx::detail::check_signatures(b.kernels, params); !v) return v;
  } catch (const group::BackendMismatch& e) {
    return Verdict::invalid(Reason::kBalanceEquation, std::nullopt, e.what());
  }
  return Verdict::valid();
}

Block cut_through(const Block& b) {
  std::multimap<Bytes, std::size_t> outputs_by_key;
  for (std::size_t i = 0; i < b.outputs.size(); ++i) {
    outputs_by_key.emplace(b.outputs[i].commitment.serialize(), i);
  }
  std::vector<bool> drop_output(b.outputs.size(), false);
  Block out = b;
  out.inputs.clear();
  out.outputs.clear();
  for (const auto& in : b.inputs) {
    auto it = outputs_by_key.find(in.commitment.serialize());
    if (it != outputs_by_key.end()) {
      drop_output[it->second] = true;
      outputs_by_key.erase(it);
    } else {
      out.inputs.push_back(in);
    }
  }
  for (std::size_t i = 0; i < b.outputs.size(); ++i) {
    if (!drop_output[i]) out.outputs.push_back(b.outputs[i]);
  }
  return out;
}

void ChainState::apply(const Block& b) {
  for (const auto& o : b.outputs) {
    utxo_.add(o.commitment);
    ever_.add(o.commitment);
  }
  for (const auto& in : b.inputs) {
    if (!utxo_.remove(in.commitment)) {
      throw InconsistencyError("input " + in.commitment.hex() + " is not in the UTXO set");
    }
  }
  ++height_;
}

Verdict ChainState::check_spends(const Block& b) const {
  if (height_ == 0) {
    if (!b.genesis) return Verdict::invalid(Reason::kGenesis, std::nullopt, "chain must start with genesis");
    return Verdict::valid();
  }
  if (b.genesis) return Verdict::invalid(Reason::kGenesis, std::nullopt, "second genesis block");

  // Outputs of the block itself are spendable inside it (cut-through).
  UtxoSet available = utxo_;
  for (const auto& o : b.outputs) available.add(o.commitment);
  for (std::size_t i = 0; i < b.inputs.size(); ++i) {
    const auto& c = b.inputs[i].commitment;
    if (available.remove(c)) continue;
    bool seen = ever_.contains(c);
    for (const auto& o : b.outputs) seen = seen || o.commitment == c;
    if (seen) return Verdict::invalid(Reason::kDoubleSpend, i, "output already spent");
    return Verdict::invalid(Reason::kUnknownInput, i, "input was never an output");
  }
  return Verdict::valid();
}

Verdict ChainState::append(const Block& b) {
  Verdict v = validate_block(b, *params_);
  if (v) v = check_spends(b);
  if (!v) {
    v.block = height_;
    return v;
  }
  apply(b);
  return v;
}

Verdict validates(const Chain& c, const Block& b, const Params& params) {
  ChainState state(params);
  for (const auto& prev : c.blocks) {
    if (auto v = state.append(prev); !v) {
      throw InconsistencyError("validates() called on an invalid chain: " + v.to_string());
    }
  }
  if (state.height() == 0) {
    return Verdict::invalid(Reason::kGenesis, std::nullopt, "empty chain cannot be extended");
  }
  return state.append(b);
}

Verdict valid_chain(const Chain& c, const Params& params) {
  if (c.blocks.empty()) return Verdict::invalid(Reason::kGenesis, std::nullopt, "empty chain");
  ChainState state(params);
  for (const auto& b : c.blocks) {
    if (auto v = state.append(b); !v) return v;
  }
  return Verdict::valid();
}

UtxoSet utxo(const Chain& c) {
  UtxoSet set;
  for (const auto& b : c.blocks) {
    for (const auto& o : b.outputs) set.add(o.commitment);
    for (const auto& in : b.inputs) {
      if (!set.remove(in.commitment)) {
        throw InconsistencyError("input " + in.commitment.hex() + " is not in the UTXO set");
      }
    }
  }
  return set;
}

}  // namespace mw::ledger
