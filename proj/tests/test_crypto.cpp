#include <doctest.h>

#include <random>

#include "mw/codec.hpp"
#include "mw/crypto.hpp"
#include "support.hpp"

using namespace mw;
using namespace mw::crypto;
using group::make_toycurve;
using group::make_transparent;

TEST_CASE("commit: fixed values") {
  auto grp = make_transparent(13, 1, 2);
  CHECK(commit(*grp, grp->scalar(0), grp->scalar(0)).point.is_identity());
  CHECK(commit(*grp, grp->scalar(3), grp->scalar(4)).point.x() == 11);
  auto curve = make_toycurve();
  CHECK(commit(*curve, curve->scalar(0), curve->scalar(0)).point.is_identity());
  CHECK(commit(*curve, curve->scalar(1), curve->scalar(0)).point == curve->g());
  CHECK(commit(*curve, curve->scalar(0), curve->scalar(1)).point == curve->h());
}

TEST_CASE("commit is additively homomorphic (1000 pairs per backend)") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    std::mt19937_64 rng(21);
    int failures = 0;
    for (int i = 0; i < 1000; ++i) {
      auto rv = test::random_scalar(*grp, rng), v = test::random_scalar(*grp, rng);
      auto rw = test::random_scalar(*grp, rng), w = test::random_scalar(*grp, rng);
      // Oracle: the group sum of the two points, computed by the backend.
      auto lhs = commit(*grp, rv, v) + commit(*grp, rw, w);
      auto rhs = commit(*grp, rv + rw, v + w);
      if (!(lhs == rhs)) ++failures;
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("transparent commitments equal r*g + v*h mod q") {
  auto grp = make_transparent();
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    std::uint64_t r = rng() % 7919, v = rng() % 7919;
    CHECK(commit(*grp, grp->scalar(r), grp->scalar(v)).point.x() == (r + v * 5657) % 7919);
  }
}

TEST_CASE("schnorr: completeness and two-sided soundness over 500 keys") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    std::mt19937_64 rng(77);
    int incomplete = 0, wrong_key = 0, wrong_msg = 0;
    for (int i = 0; i < 500; ++i) {
      auto sk = test::random_nonzero(*grp, rng);
      auto pk = sk * grp->g();
      auto sig = sign(*grp, sk);
      if (!verify(pk, "", sig)) ++incomplete;
      if (verify((sk + grp->scalar(1)) * grp->g(), "", sig)) ++wrong_key;
      if (verify(pk, "x", sig)) ++wrong_msg;
    }
    CHECK_MESSAGE(incomplete == 0, grp->id());
    CHECK_MESSAGE(wrong_key == 0, grp->id());
    CHECK_MESSAGE(wrong_msg == 0, grp->id());
  }
}

TEST_CASE("schnorr: deterministic nonces and tampering") {
  auto grp = make_toycurve();
  auto sk = grp->scalar(123456);
  auto a = sign(*grp, sk, "m");
  auto b = sign(*grp, sk, "m");
  CHECK(a == b);
  CHECK_FALSE(a == sign(*grp, sk, "n"));
  auto tampered = a;
  tampered.response += grp->scalar(1);
  CHECK_FALSE(verify(sk * grp->g(), "m", tampered));
  // Signature made in one group never verifies in another.
  auto other = make_transparent();
  CHECK_FALSE(verify(other->g(), "m", a));
}

TEST_CASE("range proof: boundaries and precondition") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    auto r = grp->scalar(1234);
    for (unsigned n : {1u, 4u, 8u}) {
      auto lo = prove_range(*grp, r, grp->scalar(0), n);
      CHECK(verify_range(commit(*grp, r, grp->scalar(0)), lo));
      std::uint64_t top = (std::uint64_t{1} << n) - 1;
      auto hi = prove_range(*grp, r, grp->scalar(top), n);
      CHECK(verify_range(commit(*grp, r, grp->scalar(top)), hi));
      CHECK_THROWS_AS(prove_range(*grp, r, grp->scalar(top + 1), n), RangeViolation);
    }
    CHECK_THROWS_AS(prove_range(*grp, r, grp->scalar(0), 0), std::invalid_argument);
    CHECK_THROWS_AS(prove_range(*grp, r, grp->scalar(0), max_range_bits(*grp) + 1),
                    std::invalid_argument);
  }
  CHECK(max_range_bits(*make_transparent()) == 12);
  CHECK(max_range_bits(*make_toycurve()) == 19);
}

TEST_CASE("range proof: bit blindings recombine to the opening") {
  auto grp = make_transparent();
  auto r = grp->scalar(4321);
  auto proof = prove_range(*grp, r, grp->scalar(5), 8);
  // Transparent: every commitment is (r_j + b_j*h) mod q, so logs are visible.
  std::uint64_t weighted = 0;
  for (unsigned j = 0; j < 8; ++j) {
    std::uint64_t bit = (5 >> j) & 1;
    std::uint64_t rj = (proof.bit_commitments[j].point.x() + 7919 - bit * 5657 % 7919) % 7919;
    weighted = (weighted + (std::uint64_t{1} << j) * rj) % 7919;
  }
  CHECK(weighted == 4321);
}

TEST_CASE("range proof: soundness examples") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    auto r = grp->scalar(999);
    auto proof = prove_range(*grp, r, grp->scalar(5), 8);
    CHECK(verify_range(commit(*grp, r, grp->scalar(5)), proof));
    CHECK_FALSE(verify_range(commit(*grp, r, grp->scalar(6)), proof));

    // Replace bit 1 by a commitment to 2 and rebuild its OR transcript with
    // the prover's algorithm (0-branch real, 1-branch simulated).
    const unsigned j = 1;
    auto forged = proof;
    auto rj = grp->scalar(77);
    forged.bit_commitments[j] = commit(*grp, rj, grp->scalar(2));
    const auto& cj = forged.bit_commitments[j].point;
    auto k = grp->scalar(31337);
    auto fake_c = grp->scalar(42), fake_s = grp->scalar(4242);
    BitProof& bp = forged.bit_proofs[j];
    bp.r0 = k * grp->g();
    bp.r1 = fake_s * grp->g() - fake_c * (cj - grp->h());
    auto e = detail::bit_challenge(commit(*grp, r, grp->scalar(5)), j, forged.bit_commitments[j],
                                   bp.r0, bp.r1);
    bp.c1 = fake_c;
    bp.s1 = fake_s;
    bp.c0 = e - fake_c;
    bp.s0 = k + bp.c0 * rj;
    CHECK_FALSE(verify_range(commit(*grp, r, grp->scalar(5)), forged));
    CHECK_FALSE(verify_range(forged.target(), forged));
  }
}

TEST_CASE("range proof: a value-2 bit forged with a known log passes its OR proof but not the sum") {
  // The transparent group leaks log_G(C) for every C, so the forger can run
  // the 0-branch honestly. Only the recombination check stands in the way.
  auto grp = make_transparent();
  auto r = grp->scalar(999);
  auto c = commit(*grp, r, grp->scalar(5));
  auto forged = prove_range(*grp, r, grp->scalar(5), 8);
  const unsigned j = 1;
  forged.bit_commitments[j] = commit(*grp, grp->scalar(77), grp->scalar(2));
  const auto& cj = forged.bit_commitments[j].point;
  auto log_cj = grp->scalar(cj.x());  // G = 1
  auto k = grp->scalar(31337);
  auto fake_c = grp->scalar(42), fake_s = grp->scalar(4242);
  BitProof& bp = forged.bit_proofs[j];
  bp.r0 = k * grp->g();
  bp.r1 = fake_s * grp->g() - fake_c * (cj - grp->h());
  auto e = detail::bit_challenge(c, j, forged.bit_commitments[j], bp.r0, bp.r1);
  bp.c1 = fake_c;
  bp.s1 = fake_s;
  bp.c0 = e - fake_c;
  bp.s0 = k + bp.c0 * log_cj;
  CHECK(bp.s0 * grp->g() == bp.r0 + bp.c0 * cj);
  CHECK(bp.s1 * grp->g() == bp.r1 + bp.c1 * (cj - grp->h()));
  CHECK_FALSE(verify_range(c, forged));
}

TEST_CASE("range proof: exhaustive completeness for n = 4") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    std::mt19937_64 rng(8);
    for (std::uint64_t v = 0; v < 16; ++v) {
      auto r = test::random_scalar(*grp, rng);
      auto proof = prove_range(*grp, r, grp->scalar(v), 4);
      CHECK(verify_range(commit(*grp, r, grp->scalar(v)), proof));
      CHECK(proof.bits == 4);
      CHECK(proof.bit_commitments.size() == 4);
    }
  }
}

namespace {

// Flips every bit of every hex field in the proof's JSON form; each variant
// must either fail to decode or fail to verify.
int accepted_bit_flips(const group::Backend& grp, const Commitment& c, const RangeProof& proof,
                       int& variants) {
  auto j = codec::to_json(proof, grp);
  int accepted = 0;
  auto try_variant = [&](const codec::json& v) {
    ++variants;
    try {
      if (verify_range(c, codec::range_proof_from_json(v, grp))) ++accepted;
    } catch (const DecodeError&) {
    }
  };
  auto flip_field = [&](codec::json& slot, const codec::json& whole) {
    Bytes raw = from_hex(slot.get<std::string>());
    for (std::size_t byte = 0; byte < raw.size(); ++byte) {
      for (int bit = 0; bit < 8; ++bit) {
        Bytes mutated = raw;
        mutated[byte] ^= static_cast<std::uint8_t>(1 << bit);
        auto saved = slot;
        slot = to_hex(mutated);
        try_variant(whole);
        slot = saved;
      }
    }
  };
  for (auto& bc : j["bit_commitments"]) flip_field(bc, j);
  for (auto& bp : j["bit_proofs"]) {
    for (const char* key : {"R0", "R1", "c0", "c1", "s0", "s1"}) flip_field(bp[key], j);
  }
  return accepted;
}

}  // namespace

TEST_CASE("range proof: every single-bit tampering is rejected") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    std::mt19937_64 rng(12);
    int variants = 0, accepted = 0;
    for (std::uint64_t v : {0u, 5u, 10u, 15u}) {
      auto r = test::random_scalar(*grp, rng);
      auto proof = prove_range(*grp, r, grp->scalar(v), 4);
      accepted += accepted_bit_flips(*grp, commit(*grp, r, grp->scalar(v)), proof, variants);
    }
    CHECK(variants > 1000);
    CHECK_MESSAGE(accepted == 0, grp->id());
  }
}

TEST_CASE("range prover interface is pluggable") {
  const RangeProver& prover = default_range_prover();
  CHECK(prover.name() == "bit-decomposition");
  auto grp = make_toycurve();
  auto proof = prover.prove(*grp, grp->scalar(5), grp->scalar(9), 4);
  CHECK(prover.verify(commit(*grp, grp->scalar(5), grp->scalar(9)), proof));
  RangeProof empty;
  CHECK_FALSE(prover.verify(commit(*grp, grp->scalar(5), grp->scalar(9)), empty));
}
