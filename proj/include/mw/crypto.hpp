#pragma once

#include <stdexcept>
#include <string_view>
#include <vector>

#include "mw/group.hpp"

namespace mw::crypto {

using group::Backend;
using group::Point;
using group::Scalar;

/// Pedersen commitment r·G + v·H.
struct Commitment {
  Point point;

  Bytes serialize() const { return point.serialize(); }
  std::string hex() const { return point.hex(); }

  friend Commitment operator+(const Commitment& a, const Commitment& b) {
    return {a.point + b.point};
  }
  friend Commitment operator-(const Commitment& a, const Commitment& b) {
    return {a.point - b.point};
  }
  friend bool operator==(const Commitment&, const Commitment&) = default;
};

/// Lexicographic order on the canonical serialization.
bool canonical_less(const Commitment& a, const Commitment& b);

Commitment commit(const Backend& grp, const Scalar& r, const Scalar& v);

// ---- Schnorr signatures over G ---------------------------------------------

struct KernelSignature {
  Point nonce_commitment;  // R
  Scalar response;         // s

  friend bool operator==(const KernelSignature&, const KernelSignature&) = default;
};

/// Fiat-Shamir challenge H(R, P, msg) reduced mod q.
Scalar challenge(const Point& nonce_commitment, const Point& public_key, ByteView msg);

/// Deterministic nonce H(sk ‖ msg); never zero.
KernelSignature sign(const Backend& grp, const Scalar& secret, ByteView msg);
bool verify(const Point& public_key, ByteView msg, const KernelSignature& sig);

inline KernelSignature sign(const Backend& grp, const Scalar& secret, std::string_view msg = {}) {
  return sign(grp, secret, as_bytes(msg));
}
inline bool verify(const Point& public_key, std::string_view msg, const KernelSignature& sig) {
  return verify(public_key, as_bytes(msg), sig);
}

// ---- Range proofs ----------------------------------------------------------

class RangeViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Two-branch Schnorr OR proof that a bit commitment opens to 0 or to 1.
struct BitProof {
  Point r0, r1;
  Scalar c0, c1;
  Scalar s0, s1;

  friend bool operator==(const BitProof&, const BitProof&) = default;
};

/// Bit-decomposition proof: value = Σ 2^j b_j with each b_j ∈ {0,1}.
struct RangeProof {
  unsigned bits = 0;
  std::vector<Commitment> bit_commitments;
  std::vector<BitProof> bit_proofs;

  /// Σ 2^j · bit_commitments[j]; the commitment this proof speaks about.
  Commitment target() const;

  friend bool operator==(const RangeProof&, const RangeProof&) = default;
};

/// Pluggable range-proof scheme.
class RangeProver {
 public:
  virtual ~RangeProver() = default;
  virtual std::string name() const = 0;
  virtual RangeProof prove(const Backend& grp, const Scalar& r, const Scalar& v,
                           unsigned bits) const = 0;
  virtual bool verify(const Commitment& c, const RangeProof& proof) const = 0;
};

class BitDecompositionProver final : public RangeProver {
 public:
  std::string name() const override { return "bit-decomposition"; }
  RangeProof prove(const Backend& grp, const Scalar& r, const Scalar& v,
                   unsigned bits) const override;
  bool verify(const Commitment& c, const RangeProof& proof) const override;
};

const RangeProver& default_range_prover();

/// Throws RangeViolation when v ∉ [0, 2^bits), std::invalid_argument when
/// 2^bits does not fit below the group order.
RangeProof prove_range(const Backend& grp, const Scalar& r, const Scalar& v, unsigned bits);
bool verify_range(const Commitment& c, const RangeProof& proof);

/// Largest bit width the group supports without wrap-around.
unsigned max_range_bits(const Backend& grp);

namespace detail {
/// Fiat-Shamir challenge of bit `index` of a proof for `target`.
Scalar bit_challenge(const Commitment& target, std::size_t index, const Commitment& bit,
                     const Point& r0, const Point& r1);
}  // namespace detail

}  // namespace mw::crypto
