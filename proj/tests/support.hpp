#pragma once

#include <random>
#include <set>
#include <vector>

#include "mw/ledger.hpp"

namespace mw::test {

using group::Backend;
using group::Scalar;
using tx::Opening;

inline Scalar random_scalar(const Backend& grp, std::mt19937_64& rng) {
  return grp.scalar(rng() % grp.order());
}

inline Scalar random_nonzero(const Backend& grp, std::mt19937_64& rng) {
  return grp.scalar(1 + rng() % (grp.order() - 1));
}

inline Opening opening(const Backend& grp, std::uint64_t r, std::uint64_t v) {
  return {grp.scalar(r), grp.scalar(v)};
}

/// Hands out openings whose commitments never repeat, so that generated
/// chains do not collide by accident on small groups.
class CoinFactory {
 public:
  CoinFactory(const Backend& grp, std::uint64_t seed) : grp_(grp), rng_(seed) {}

  Opening fresh(std::uint64_t value) {
    for (;;) {
      Opening o{random_nonzero(grp_, rng_), grp_.scalar(value)};
      if (used_.insert(crypto::commit(grp_, o.blinding, o.value).serialize()).second) return o;
    }
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  const Backend& grp_;
  std::mt19937_64 rng_;
  std::set<Bytes> used_;
};

/// Splits `total` into `parts` non-negative values below 2^bits.
inline std::vector<std::uint64_t> split_value(std::uint64_t total, std::size_t parts, unsigned bits,
                                              std::mt19937_64& rng) {
  std::vector<std::uint64_t> out(parts, 0);
  const std::uint64_t cap = (std::uint64_t{1} << bits) - 1;
  std::uint64_t left = total;
  if (total > cap * parts) throw std::invalid_argument("total does not fit the parts");
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    // Leave no more than the remaining parts can carry.
    std::uint64_t rest = cap * (parts - i - 1);
    std::uint64_t min_take = left > rest ? left - rest : 0;
    std::uint64_t max_take = std::min(left, cap);
    std::uint64_t take = min_take + rng() % (max_take - min_take + 1);
    out[i] = take;
    left -= take;
  }
  if (parts > 0) out[parts - 1] = left;
  return out;
}

}  // namespace mw::test

namespace mw::test {

/// Keeps the openings of spendable coins for building valid chains.
class Wallet {
 public:
  Wallet(tx::Params params, std::uint64_t seed) : params_(std::move(params)), coins_(*params_.group, seed) {}

  const tx::Params& params() const { return params_; }
  CoinFactory& coins() { return coins_; }
  std::mt19937_64& rng() { return coins_.rng(); }
  std::vector<Opening>& unspent() { return unspent_; }

  unsigned bits() const { return params_.range_bits; }
  std::uint64_t cap() const { return (std::uint64_t{1} << bits()) - 1; }

  ledger::Block genesis(std::size_t outputs) {
    std::vector<Opening> outs;
    for (std::size_t i = 0; i < outputs; ++i) outs.push_back(coins_.fresh(rng()() % (cap() + 1)));
    unspent_ = outs;
    return ledger::make_genesis(params_, outs);
  }

  /// Spends `nin` random unspent coins into `nout` fresh outputs. The spent
  /// coins leave the wallet at once; new outputs are returned through
  /// `created` and become spendable when the caller says so.
  tx::Transaction spend(std::size_t nin, std::size_t nout, std::vector<Opening>& created) {
    std::vector<Opening> in;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < nin && !unspent_.empty(); ++i) {
      std::size_t pick = rng()() % unspent_.size();
      in.push_back(unspent_[pick]);
      total += unspent_[pick].value.value();
      unspent_.erase(unspent_.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    while (total > cap() * nout) ++nout;
    std::vector<Opening> out;
    for (auto v : split_value(total, nout, bits(), rng())) out.push_back(coins_.fresh(v));
    created.insert(created.end(), out.begin(), out.end());
    return tx::build_transaction(params_, in, out);
  }

  void receive(const std::vector<Opening>& outs) { unspent_.insert(unspent_.end(), outs.begin(), outs.end()); }

 private:
  tx::Params params_;
  CoinFactory coins_;
  std::vector<Opening> unspent_;
};

}  // namespace mw::test
