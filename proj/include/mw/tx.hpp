#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mw/crypto.hpp"
#include "mw/verdict.hpp"

namespace mw::tx {

using crypto::Commitment;
using crypto::KernelSignature;
using crypto::RangeProof;
using group::BackendPtr;
using group::Point;
using group::Scalar;

/// Opening (r, v) of a commitment r·G + v·H. Never serialized.
struct Opening {
  Scalar blinding;
  Scalar value;
};

/// Input or output entry. Only the commitment is part of the wire form; the
/// opening is kept by whoever built it.
struct Coin {
  Commitment commitment;
  std::optional<Opening> opening;

  friend bool operator==(const Coin& a, const Coin& b) { return a.commitment == b.commitment; }
};
using TxInput = Coin;
using TxOutput = Coin;

struct TxKernel {
  Point excess;
  KernelSignature signature;
  std::vector<RangeProof> range_proofs;
  /// Discrete log of `excess` w.r.t. G, known only to the builder.
  std::optional<Scalar> secret;

  friend bool operator==(const TxKernel& a, const TxKernel& b) {
    return a.excess == b.excess && a.signature == b.signature && a.range_proofs == b.range_proofs;
  }
};

struct Transaction {
  std::vector<TxInput> inputs;
  std::vector<TxOutput> outputs;
  std::vector<TxKernel> kernels;

  friend bool operator==(const Transaction&, const Transaction&) = default;
};

/// Validation context shared by transactions, blocks and chains.
struct Params {
  BackendPtr group;
  unsigned range_bits = 8;
  /// Message every kernel signs. Empty by default.
  std::string kernel_message;
  const crypto::RangeProver* prover = &crypto::default_range_prover();

  static Params with(BackendPtr group, unsigned bits = 8) {
    Params p;
    p.group = std::move(group);
    p.range_bits = bits;
    return p;
  }
  const group::Backend& grp() const { return *group; }
};

class BuildError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Commitment sum(std::span<const Coin> coins, const group::Backend& grp);

/// Σ output commitments − Σ input commitments.
Point excess_of(const Transaction& tx, const group::Backend& grp);

/// Spends `spends` into fresh `outputs`, signing with Σr′ − Σr.
///
/// Throws BuildError when Σv′ ≠ Σv and crypto::RangeViolation when an output
/// value does not fit in `params.range_bits`.
Transaction build_transaction(const Params& params, std::span<const Opening> spends,
                              std::span<const Opening> outputs);

/// Three-clause validity judgment plus duplicate-input hygiene.
///
/// Checked in order: DuplicateInput, RangeProof (every output has a verifying
/// proof and the proof count matches), KernelSignature (each signature under
/// its recorded excess), Unbalanced (Σ out − Σ in = Σ excess). A signature
/// under a G-only public key together with the last equation witnesses that
/// no value was created.
Verdict validate_transaction(const Transaction& tx, const Params& params);

namespace detail {
/// Shared with block validation. With `exact` the number of proofs must equal
/// the number of outputs; otherwise surplus proofs are allowed but must verify.
Verdict check_range_proofs(std::span<const Coin> outputs, std::span<const TxKernel> kernels,
                           const Params& params, bool exact);
Verdict check_signatures(std::span<const TxKernel> kernels, const Params& params);
Verdict check_duplicate_inputs(std::span<const Coin> inputs);
/// Σ out − Σ in = Σ excess.
Verdict check_balance(const Transaction& tx, const Params& params);
}  // namespace detail

}  // namespace mw::tx
