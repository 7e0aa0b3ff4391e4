#include <doctest.h>

#include "mw/tx.hpp"
#include "support.hpp"

using namespace mw;
using namespace mw::tx;
using group::make_toycurve;
using group::make_transparent;

TEST_CASE("excess_of: empty and single-spend cases") {
  auto grp = make_transparent();
  Transaction empty;
  CHECK(excess_of(empty, *grp).is_identity());

  auto params = Params::with(grp, 4);
  std::vector<Opening> in{test::opening(*grp, 2, 5)};
  std::vector<Opening> out{test::opening(*grp, 7, 5)};
  auto t = build_transaction(params, in, out);
  CHECK(excess_of(t, *grp) == grp->scalar(5) * grp->g());
  CHECK(t.kernels.size() == 1);
  CHECK(t.kernels[0].excess == grp->scalar(5) * grp->g());
  CHECK(t.kernels[0].secret == grp->scalar(5));
  CHECK(crypto::verify(grp->scalar(5) * grp->g(), "", t.kernels[0].signature));
  CHECK(validate_transaction(t, params).ok());

  Transaction one;
  one.inputs.push_back({crypto::commit(*grp, grp->scalar(2), grp->scalar(5)), {}});
  one.outputs.push_back({crypto::commit(*grp, grp->scalar(3), grp->scalar(5)), {}});
  CHECK(excess_of(one, *grp) == grp->g());
}

TEST_CASE("excess_of matches integer arithmetic on the transparent group") {
  auto grp = make_transparent();
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    Transaction t;
    std::int64_t expected = 0;
    for (int k = 0; k < 3; ++k) {
      std::uint64_t r = rng() % 7919, v = rng() % 7919;
      t.inputs.push_back({crypto::commit(*grp, grp->scalar(r), grp->scalar(v)), {}});
      expected -= static_cast<std::int64_t>((r + v * 5657) % 7919);
    }
    for (int k = 0; k < 2; ++k) {
      std::uint64_t r = rng() % 7919, v = rng() % 7919;
      t.outputs.push_back({crypto::commit(*grp, grp->scalar(r), grp->scalar(v)), {}});
      expected += static_cast<std::int64_t>((r + v * 5657) % 7919);
    }
    std::int64_t mod = ((expected % 7919) + 7919) % 7919;
    CHECK(excess_of(t, *grp).x() == static_cast<std::uint64_t>(mod));
  }
}

TEST_CASE("build_transaction rejects imbalance and out-of-range outputs") {
  auto grp = make_toycurve();
  auto params = Params::with(grp, 4);
  std::vector<Opening> in{test::opening(*grp, 2, 5)};
  std::vector<Opening> more{test::opening(*grp, 7, 6)};
  CHECK_THROWS_AS(build_transaction(params, in, more), BuildError);
  std::vector<Opening> big_in{test::opening(*grp, 2, 16)};
  std::vector<Opening> big_out{test::opening(*grp, 7, 16)};
  CHECK_THROWS_AS(build_transaction(params, big_in, big_out), crypto::RangeViolation);
}

TEST_CASE("random multi-input multi-output transactions validate, and excess = (Σr' − Σr)G") {
  for (auto grp : {make_transparent(), make_toycurve()}) {
    auto params = Params::with(grp, 6);
    test::CoinFactory coins(*grp, 31);
    auto& rng = coins.rng();
    for (int i = 0; i < 40; ++i) {
      std::size_t nin = 1 + rng() % 3, nout = 1 + rng() % 3;
      std::vector<Opening> in, out;
      std::uint64_t total = 0;
      Scalar rsum = grp->scalar(0);
      for (std::size_t k = 0; k < nin; ++k) {
        in.push_back(coins.fresh(rng() % 20));
        total += in.back().value.value();
        rsum -= in.back().blinding;
      }
      for (auto v : test::split_value(total, nout, 6, rng)) {
        out.push_back(coins.fresh(v));
        rsum += out.back().blinding;
      }
      auto t = build_transaction(params, in, out);
      CHECK(validate_transaction(t, params).ok());
      CHECK(excess_of(t, *grp) == rsum * grp->g());
    }
  }
}

namespace {

struct Fixture {
  group::BackendPtr grp = make_toycurve();
  Params params = Params::with(grp, 4);
  Transaction tx;

  Fixture() {
    std::vector<Opening> in{test::opening(*grp, 11, 9), test::opening(*grp, 12, 4)};
    std::vector<Opening> out{test::opening(*grp, 21, 6), test::opening(*grp, 22, 7)};
    tx = build_transaction(params, in, out);
  }
};

}  // namespace

TEST_CASE("validate_transaction: honest, thin-air money, swapped range proof") {
  Fixture f;
  CHECK(validate_transaction(f.tx, f.params).ok());

  // Money from thin air: output +H. The forger knows the new opening, so it
  // re-proves the range and moves the excess along; only the signature is
  // beyond reach.
  {
    auto t = f.tx;
    auto& out = t.outputs[0];
    Opening o = *out.opening;
    o.value += f.grp->scalar(1);
    out.commitment = crypto::commit(*f.grp, o.blinding, o.value);
    t.kernels[0].range_proofs[0] = crypto::prove_range(*f.grp, o.blinding, o.value, 4);
    t.kernels[0].excess = t.kernels[0].excess + f.grp->h();
    auto v = validate_transaction(t, f.params);
    CHECK(v.reason == Reason::kKernelSignature);
    CHECK(v.index == 0u);
  }
  // Same +H without touching the kernel: the excess no longer matches.
  {
    auto t = f.tx;
    Opening o = *t.outputs[0].opening;
    o.value += f.grp->scalar(1);
    t.outputs[0].commitment = crypto::commit(*f.grp, o.blinding, o.value);
    t.kernels[0].range_proofs[0] = crypto::prove_range(*f.grp, o.blinding, o.value, 4);
    CHECK(validate_transaction(t, f.params).reason == Reason::kUnbalanced);
  }
  // Range proof for a different value.
  {
    auto t = f.tx;
    const Opening& o = *t.outputs[1].opening;
    t.kernels[0].range_proofs[1] = crypto::prove_range(*f.grp, o.blinding, f.grp->scalar(3), 4);
    auto v = validate_transaction(t, f.params);
    CHECK(v.reason == Reason::kRangeProof);
    CHECK(v.index == 1u);
  }
  // Output +H with the stale proof left in place.
  {
    auto t = f.tx;
    t.outputs[0].commitment = t.outputs[0].commitment + crypto::Commitment{f.grp->h()};
    CHECK(validate_transaction(t, f.params).reason == Reason::kRangeProof);
  }
}

TEST_CASE("validate_transaction: structural failures") {
  Fixture f;
  {
    auto t = f.tx;
    t.inputs.push_back(t.inputs[0]);
    auto v = validate_transaction(t, f.params);
    CHECK(v.reason == Reason::kDuplicateInput);
    CHECK(v.index == 2u);
  }
  {
    auto t = f.tx;
    t.kernels[0].range_proofs.pop_back();
    CHECK(validate_transaction(t, f.params).reason == Reason::kRangeProof);
  }
  {
    auto t = f.tx;
    t.kernels[0].signature.response += f.grp->scalar(1);
    CHECK(validate_transaction(t, f.params).reason == Reason::kKernelSignature);
  }
  {
    // Proof width must match the configured width.
    auto wide = Params::with(f.grp, 5);
    CHECK(validate_transaction(f.tx, wide).reason == Reason::kRangeProof);
  }
  {
    // Kernel message is part of the judgment.
    auto other = f.params;
    other.kernel_message = "features";
    CHECK(validate_transaction(f.tx, other).reason == Reason::kKernelSignature);
  }
}

TEST_CASE("zero-sum: every valid transparent transaction balances values") {
  // The transparent group exposes every log, so Σv can be read back from the
  // commitments and compared once validation accepts.
  auto grp = make_transparent();
  auto params = Params::with(grp, 4);
  test::CoinFactory coins(*grp, 5);
  auto& rng = coins.rng();
  const std::uint64_t h_inv = grp->scalar(5657).inverse().value();
  for (int i = 0; i < 100; ++i) {
    std::vector<Opening> in{coins.fresh(rng() % 16), coins.fresh(rng() % 16)};
    std::uint64_t total = in[0].value.value() + in[1].value.value();
    std::vector<Opening> out;
    for (auto v : test::split_value(total, 3, 4, rng)) out.push_back(coins.fresh(v));
    auto t = build_transaction(params, in, out);
    REQUIRE(validate_transaction(t, params).ok());
    // Σ(out) − Σ(in) − excess = (Σv' − Σv)·H must be the identity.
    auto residue = excess_of(t, *grp) - t.kernels[0].excess;
    CHECK(group::mulmod(residue.x(), h_inv, 7919) == 0);
  }
}
