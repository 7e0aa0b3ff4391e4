#pragma once

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "mw/tx.hpp"

namespace mw::ledger {

using tx::Coin;
using tx::Opening;
using tx::Params;
using tx::Transaction;
using tx::TxKernel;
using group::Point;
using group::Scalar;

/// Aggregated transactions of one block.
///
/// `offset` is the kernel offset k added back in the block equation
///   Σ outputs − Σ inputs = k·G + Σ excess + supply·H.
/// `supply` is the publicly minted amount and must be zero outside genesis.
struct Block {
  std::vector<Coin> inputs;
  std::vector<Coin> outputs;
  Scalar offset;
  std::vector<TxKernel> kernels;
  bool genesis = false;
  std::uint64_t supply = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

struct Chain {
  std::vector<Block> blocks;

  friend bool operator==(const Chain&, const Chain&) = default;
};

/// Multiset of unspent output commitments keyed by canonical serialization.
class UtxoSet {
 public:
  void add(const crypto::Commitment& c);
  /// Returns false (and leaves the set unchanged) when `c` is not present.
  bool remove(const crypto::Commitment& c);
  std::size_t count(const crypto::Commitment& c) const;
  bool contains(const crypto::Commitment& c) const { return count(c) != 0; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  /// Sorted canonically, duplicates repeated.
  std::vector<crypto::Commitment> commitments() const;

  friend bool operator==(const UtxoSet& a, const UtxoSet& b);

 private:
  struct Entry {
    crypto::Commitment commitment;
    std::size_t count = 0;
  };
  std::map<Bytes, Entry> entries_;
  std::size_t size_ = 0;
};

class ConflictError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class AggregateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Genesis block minting `outputs`; its supply is the sum of their values.
Block make_genesis(const Params& params, std::span<const Opening> outputs);

/// CoinJoin: concatenates, sorts canonically and moves `offset` out of one
/// kernel whose secret is known. Throws ConflictError on overlapping inputs and
/// AggregateError on an invalid transaction or when a non-zero offset cannot be
/// applied.
Block aggregate(std::span<const Transaction> txs, const Scalar& offset, const Params& params);

/// Checked in order: genesis shape, duplicate inputs, the block equation,
/// range proofs (surplus proofs left by cut-through must still verify),
/// kernel signatures.
Verdict validate_block(const Block& b, const Params& params);

/// Removes commitments that are both spent and created in `b`, one for one.
Block cut_through(const Block& b);

/// Whether `b` may extend `c` (assumed valid).
Verdict validates(const Chain& c, const Block& b, const Params& params);

Verdict valid_chain(const Chain& c, const Params& params);

/// Folds outputs-added / inputs-removed over the chain. Throws
/// InconsistencyError on an input missing from the running set.
UtxoSet utxo(const Chain& c);

/// Incremental form of valid_chain: feed blocks in order.
class ChainState {
 public:
  explicit ChainState(const Params& params) : params_(&params) {}

  /// Checks `b` against the current state; on success the block is applied.
  Verdict append(const Block& b);
  /// Spend check only (no crypto); used by validates() and the pool.
  Verdict check_spends(const Block& b) const;

  const UtxoSet& utxo() const { return utxo_; }
  std::size_t height() const { return height_; }
  bool ever_output(const crypto::Commitment& c) const { return ever_.contains(c); }

  /// Applies an already validated block without re-checking it. Throws
  /// InconsistencyError on a missing input.
  void apply(const Block& b);

 private:

  const Params* params_;
  UtxoSet utxo_;
  UtxoSet ever_;
  std::size_t height_ = 0;
};

}  // namespace mw::ledger
