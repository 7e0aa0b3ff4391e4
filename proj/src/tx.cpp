#include "mw/tx.hpp"

#include <map>
#include <set>

namespace mw::tx {

Commitment sum(std::span<const Coin> coins, const group::Backend& grp) {
  Point acc = grp.identity();
  for (const auto& c : coins) acc += c.commitment.point;
  return {acc};
}

Point excess_of(const Transaction& tx, const group::Backend& grp) {
  return (sum(tx.outputs, grp) - sum(tx.inputs, grp)).point;
}

Transaction build_transaction(const Params& params, std::span<const Opening> spends,
                              std::span<const Opening> outputs) {
  const auto& grp = params.grp();
  std::uint64_t in_total = 0;
  std::uint64_t out_total = 0;
  Scalar secret = grp.scalar(0);

  Transaction tx;
  for (const auto& o : spends) {
    in_total += o.value.value();
    secret -= o.blinding;
    tx.inputs.push_back({crypto::commit(grp, o.blinding, o.value), o});
  }
  for (const auto& o : outputs) {
    out_total += o.value.value();
    secret += o.blinding;
  }
  if (in_total != out_total) {
    throw BuildError("value imbalance: inputs carry " + std::to_string(in_total) +
                     ", outputs carry " + std::to_string(out_total));
  }

  TxKernel kernel;
  for (const auto& o : outputs) {
    kernel.range_proofs.push_back(params.prover->prove(grp, o.blinding, o.value, params.range_bits));
    tx.outputs.push_back({crypto::commit(grp, o.blinding, o.value), o});
  }
  kernel.excess = secret * grp.g();
  kernel.signature = crypto::sign(grp, secret, params.kernel_message);
  kernel.secret = secret;
  tx.kernels.push_back(std::move(kernel));
  return tx;
}

namespace detail {

Verdict check_duplicate_inputs(std::span<const Coin> inputs) {
  std::set<Bytes> seen;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!seen.insert(inputs[i].commitment.serialize()).second) {
      return Verdict::invalid(Reason::kDuplicateInput, i, "input commitment repeated");
    }
  }
  return Verdict::valid();
}

Verdict check_range_proofs(std::span<const Coin> outputs, std::span<const TxKernel> kernels,
                           const Params& params, bool exact) {
  std::vector<const RangeProof*> proofs;
  for (const auto& k : kernels) {
    for (const auto& p : k.range_proofs) proofs.push_back(&p);
  }
  if (exact && proofs.size() != outputs.size()) {
    return Verdict::invalid(Reason::kRangeProof, std::nullopt,
                            std::to_string(proofs.size()) + " range proofs for " +
                                std::to_string(outputs.size()) + " outputs");
  }
  if (proofs.size() < outputs.size()) {
    return Verdict::invalid(Reason::kRangeProof, std::nullopt, "fewer range proofs than outputs");
  }

  // Proofs are matched to outputs through the commitment they reconstruct.
  std::multimap<Bytes, std::size_t> by_target;
  for (std::size_t i = 0; i < proofs.size(); ++i) {
    const RangeProof& p = *proofs[i];
    if (p.bits != params.range_bits || p.bit_commitments.empty()) continue;
    try {
      by_target.emplace(p.target().serialize(), i);
    } catch (const std::logic_error&) {
      // mixed groups inside one proof; it can never verify
    }
  }
  std::vector<bool> used(proofs.size(), false);
  for (std::size_t o = 0; o < outputs.size(); ++o) {
    auto [lo, hi] = by_target.equal_range(outputs[o].commitment.serialize());
    bool matched = false;
    for (auto it = lo; it != hi && !matched; ++it) {
      if (used[it->second]) continue;
      if (params.prover->verify(outputs[o].commitment, *proofs[it->second])) {
        used[it->second] = true;
        matched = true;
      }
    }
    if (!matched) {
      return Verdict::invalid(Reason::kRangeProof, o, "no valid range proof for output");
    }
  }
  for (std::size_t i = 0; i < proofs.size(); ++i) {
    if (used[i]) continue;
    const RangeProof& p = *proofs[i];
    bool ok = p.bits == params.range_bits && !p.bit_commitments.empty();
    if (ok) {
      try {
        ok = params.prover->verify(p.target(), p);
      } catch (const std::logic_error&) {
        ok = false;
      }
    }
    if (!ok) return Verdict::invalid(Reason::kRangeProof, std::nullopt, "unmatched proof fails");
  }
  return Verdict::valid();
}

Verdict check_signatures(std::span<const TxKernel> kernels, const Params& params) {
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    if (!crypto::verify(kernels[k].excess, params.kernel_message, kernels[k].signature)) {
      return Verdict::invalid(Reason::kKernelSignature, k, "signature does not verify under excess");
    }
  }
  return Verdict::valid();
}

}  // namespace detail

Verdict detail::check_balance(const Transaction& tx, const Params& params) {
  const auto& grp = params.grp();
  try {
    Point kernel_sum = grp.identity();
    for (const auto& k : tx.kernels) kernel_sum += k.excess;
    if (!(excess_of(tx, grp) == kernel_sum)) {
      return Verdict::invalid(Reason::kUnbalanced, std::nullopt,
                              "outputs minus inputs differ from the kernel excesses");
    }
  } catch (const group::BackendMismatch& e) {
    return Verdict::invalid(Reason::kUnbalanced, std::nullopt, e.what());
  }
  return Verdict::valid();
}

Verdict validate_transaction(const Transaction& tx, const Params& params) {
  try {
    if (auto v = detail::check_duplicate_inputs(tx.inputs); !v) return v;
    if (auto v = detail::check_range_proofs(tx.outputs, tx.kernels, params, true); !v) return v;
    if (auto v = detail::check_signatures(tx.kernels, params); !v) return v;
    return detail::check_balance(tx, params);
  } catch (const group::BackendMismatch& e) {
    return Verdict::invalid(Reason::kUnbalanced, std::nullopt, e.what());
  }
}

}  // namespace mw::tx
