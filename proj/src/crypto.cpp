#include "mw/crypto.hpp"

#include <algorithm>
#include <bit>

#include "mw/hash.hpp"

namespace mw::crypto {

bool canonical_less(const Commitment& a, const Commitment& b) {
  return a.serialize() < b.serialize();
}

Commitment commit(const Backend& grp, const Scalar& r, const Scalar& v) {
  return {r * grp.g() + v * grp.h()};
}

// ---- Schnorr ---------------------------------------------------------------

Scalar challenge(const Point& nonce_commitment, const Point& public_key, ByteView msg) {
  const Backend& grp = public_key.backend();
  Hasher h("mw/schnorr/challenge");
  h.update_framed(nonce_commitment.serialize()).update_framed(public_key.serialize()).update_framed(msg);
  Digest d = h.finish();
  return grp.scalar_from_bytes(d);
}

namespace {

Scalar derive_nonzero(const Backend& grp, std::string_view domain, ByteView seed) {
  for (std::uint64_t ctr = 0;; ++ctr) {
    Hasher h(domain);
    h.update_framed(seed).update_u64(ctr);
    Digest d = h.finish();
    Scalar k = grp.scalar_from_bytes(d);
    if (!k.is_zero()) return k;
  }
}

}  // namespace

KernelSignature sign(const Backend& grp, const Scalar& secret, ByteView msg) {
  grp.check_scalar(secret);
  Bytes seed = grp.serialize(secret);
  Bytes framed;
  put_be(framed, msg.size(), 8);
  seed.insert(seed.end(), framed.begin(), framed.end());
  seed.insert(seed.end(), msg.begin(), msg.end());
  Scalar k = derive_nonzero(grp, "mw/schnorr/nonce", seed);
  Point nonce_commitment = k * grp.g();
  Point pk = secret * grp.g();
  Scalar e = challenge(nonce_commitment, pk, msg);
  return {nonce_commitment, k + e * secret};
}

bool verify(const Point& public_key, ByteView msg, const KernelSignature& sig) {
  try {
    const Backend& grp = public_key.backend();
    Scalar e = challenge(sig.nonce_commitment, public_key, msg);
    return sig.response * grp.g() == sig.nonce_commitment + e * public_key;
  } catch (const group::BackendMismatch&) {
    return false;
  }
}

// ---- Range proofs ----------------------------------------------------------

Commitment RangeProof::target() const {
  if (bit_commitments.empty()) throw std::logic_error("range proof without bit commitments");
  const Backend& grp = bit_commitments.front().point.backend();
  Point acc = grp.identity();
  Scalar weight = grp.scalar(1);
  for (const auto& c : bit_commitments) {
    acc += weight * c.point;
    weight += weight;
  }
  return {acc};
}

unsigned max_range_bits(const Backend& grp) {
  // 2^bits must stay strictly below q.
  return static_cast<unsigned>(std::bit_width(grp.order()) - 1);
}

namespace {

void check_width(const Backend& grp, unsigned bits) {
  if (bits == 0 || bits > max_range_bits(grp)) {
    throw std::invalid_argument("range proof width " + std::to_string(bits) +
                                " unsupported by group " + grp.id());
  }
}

}  // namespace

namespace detail {

Scalar bit_challenge(const Commitment& target, std::size_t index, const Commitment& bit,
                     const Point& r0, const Point& r1) {
  const Backend& grp = bit.point.backend();
  Hasher h("mw/range/bit");
  h.update_framed(target.serialize())
      .update_u64(index)
      .update_framed(bit.serialize())
      .update_framed(r0.serialize())
      .update_framed(r1.serialize());
  Digest d = h.finish();
  return grp.scalar_from_bytes(d);
}

}  // namespace detail

namespace {

// Deterministic per-proof randomness, keyed by the opening.
class Tape {
 public:
  Tape(const Backend& grp, const Scalar& r, const Scalar& v, unsigned bits) : grp_(grp) {
    seed_ = grp.serialize(r);
    Bytes vb = grp.serialize(v);
    seed_.insert(seed_.end(), vb.begin(), vb.end());
    put_be(seed_, bits, 1);
  }

  Scalar draw(std::string_view label, std::size_t index) const {
    Bytes s = seed_;
    put_be(s, index, 8);
    s.insert(s.end(), label.begin(), label.end());
    return derive_nonzero(grp_, "mw/range/tape", s);
  }

 private:
  const Backend& grp_;
  Bytes seed_;
};

}  // namespace

RangeProof BitDecompositionProver::prove(const Backend& grp, const Scalar& r, const Scalar& v,
                                         unsigned bits) const {
  check_width(grp, bits);
  grp.check_scalar(r);
  grp.check_scalar(v);
  if (v.value() >> bits != 0) {
    throw RangeViolation("value " + std::to_string(v.value()) + " outside [0, 2^" +
                         std::to_string(bits) + ")");
  }
  Tape tape(grp, r, v, bits);

  // Bit blindings with Σ 2^j r_j = r; r_0 absorbs the remainder.
  std::vector<Scalar> blind(bits);
  Scalar weighted = grp.scalar(0);
  Scalar weight = grp.scalar(2);
  for (unsigned j = 1; j < bits; ++j) {
    blind[j] = tape.draw("blind", j);
    weighted += weight * blind[j];
    weight += weight;
  }
  blind[0] = r - weighted;

  RangeProof proof;
  proof.bits = bits;
  for (unsigned j = 0; j < bits; ++j) {
    proof.bit_commitments.push_back(commit(grp, blind[j], grp.scalar((v.value() >> j) & 1)));
  }
  const Commitment target = commit(grp, r, v);

  for (unsigned j = 0; j < bits; ++j) {
    const bool bit = (v.value() >> j) & 1;
    const Point& c = proof.bit_commitments[j].point;
    const Point c_minus_h = c - grp.h();
    Scalar k = tape.draw("nonce", j);
    Scalar fake_c = tape.draw("fake-challenge", j);
    Scalar fake_s = tape.draw("fake-response", j);

    BitProof bp;
    if (!bit) {
      bp.r0 = k * grp.g();
      bp.r1 = fake_s * grp.g() - fake_c * c_minus_h;
      Scalar e = detail::bit_challenge(target, j, proof.bit_commitments[j], bp.r0, bp.r1);
      bp.c1 = fake_c;
      bp.s1 = fake_s;
      bp.c0 = e - fake_c;
      bp.s0 = k + bp.c0 * blind[j];
    } else {
      bp.r1 = k * grp.g();
      bp.r0 = fake_s * grp.g() - fake_c * c;
      Scalar e = detail::bit_challenge(target, j, proof.bit_commitments[j], bp.r0, bp.r1);
      bp.c0 = fake_c;
      bp.s0 = fake_s;
      bp.c1 = e - fake_c;
      bp.s1 = k + bp.c1 * blind[j];
    }
    proof.bit_proofs.push_back(bp);
  }
  return proof;
}

bool BitDecompositionProver::verify(const Commitment& c, const RangeProof& proof) const {
  try {
    const Backend& grp = c.point.backend();
    if (proof.bits == 0 || proof.bits > max_range_bits(grp)) return false;
    if (proof.bit_commitments.size() != proof.bits || proof.bit_proofs.size() != proof.bits) {
      return false;
    }
    if (!(proof.target() == c)) return false;
    for (std::size_t j = 0; j < proof.bits; ++j) {
      const Point& cj = proof.bit_commitments[j].point;
      const BitProof& bp = proof.bit_proofs[j];
      Scalar e = detail::bit_challenge(c, j, proof.bit_commitments[j], bp.r0, bp.r1);
      if (!(bp.c0 + bp.c1 == e)) return false;
      if (!(bp.s0 * grp.g() == bp.r0 + bp.c0 * cj)) return false;
      if (!(bp.s1 * grp.g() == bp.r1 + bp.c1 * (cj - grp.h()))) return false;
    }
    return true;
  } catch (const group::BackendMismatch&) {
    return false;
  } catch (const std::logic_error&) {
    return false;
  }
}

const RangeProver& default_range_prover() {
  static const BitDecompositionProver prover;
  return prover;
}

RangeProof prove_range(const Backend& grp, const Scalar& r, const Scalar& v, unsigned bits) {
  return default_range_prover().prove(grp, r, v, bits);
}

bool verify_range(const Commitment& c, const RangeProof& proof) {
  return default_range_prover().verify(c, proof);
}

}  // namespace mw::crypto
