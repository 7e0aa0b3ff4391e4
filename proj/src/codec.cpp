#include "mw/codec.hpp"

namespace mw::codec {

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw DecodeError(std::string("expected object with field '") + name + "'");
  auto it = j.find(name);
  if (it == j.end()) throw DecodeError(std::string("missing field '") + name + "'");
  return *it;
}

const json& array(const json& j, const char* what) {
  if (!j.is_array()) throw DecodeError(std::string(what) + " must be an array");
  return j;
}

std::string hex_string(const json& j) {
  if (!j.is_string()) throw DecodeError("expected hex string");
  return j.get<std::string>();
}

json coins_to_json(std::span<const tx::Coin> coins) {
  json out = json::array();
  for (const auto& c : coins) out.push_back(c.commitment.hex());
  return out;
}

std::vector<tx::Coin> coins_from_json(const json& j, const Backend& grp) {
  std::vector<tx::Coin> out;
  for (const auto& e : array(j, "commitment list")) out.push_back({{point_from_json(e, grp)}, {}});
  return out;
}

json kernels_to_json(std::span<const tx::TxKernel> ks, const Backend& grp) {
  json out = json::array();
  for (const auto& k : ks) out.push_back(to_json(k, grp));
  return out;
}

std::vector<tx::TxKernel> kernels_from_json(const json& j, const Backend& grp) {
  std::vector<tx::TxKernel> out;
  for (const auto& e : array(j, "kernels")) out.push_back(kernel_from_json(e, grp));
  return out;
}

}  // namespace

json to_json(const group::Point& p) { return p.hex(); }

json to_json(const group::Scalar& s, const Backend& grp) { return to_hex(grp.serialize(s)); }

json to_json(const crypto::KernelSignature& sig, const Backend& grp) {
  return {{"R", to_json(sig.nonce_commitment)}, {"s", to_json(sig.response, grp)}};
}

json to_json(const crypto::RangeProof& proof, const Backend& grp) {
  json bits = json::array();
  for (const auto& c : proof.bit_commitments) bits.push_back(c.hex());
  json proofs = json::array();
  for (const auto& bp : proof.bit_proofs) {
    proofs.push_back({{"R0", to_json(bp.r0)},
                      {"R1", to_json(bp.r1)},
                      {"c0", to_json(bp.c0, grp)},
                      {"c1", to_json(bp.c1, grp)},
                      {"s0", to_json(bp.s0, grp)},
                      {"s1", to_json(bp.s1, grp)}});
  }
  return {{"n", proof.bits}, {"bit_commitments", bits}, {"bit_proofs", proofs}};
}

json to_json(const tx::TxKernel& k, const Backend& grp) {
  json proofs = json::array();
  for (const auto& p : k.range_proofs) proofs.push_back(to_json(p, grp));
  return {{"excess", to_json(k.excess)}, {"sig", to_json(k.signature, grp)}, {"range_proofs", proofs}};
}

json to_json(const tx::Transaction& t, const Backend& grp) {
  return {{"inputs", coins_to_json(t.inputs)},
          {"outputs", coins_to_json(t.outputs)},
          {"kernels", kernels_to_json(t.kernels, grp)}};
}

json to_json(const ledger::Block& b, const Backend& grp) {
  return {{"genesis", b.genesis},
          {"supply", b.supply},
          {"offset", to_json(b.offset, grp)},
          {"inputs", coins_to_json(b.inputs)},
          {"outputs", coins_to_json(b.outputs)},
          {"kernels", kernels_to_json(b.kernels, grp)}};
}

json to_json(const ledger::Chain& c, const Backend& grp) {
  json out = json::array();
  for (const auto& b : c.blocks) out.push_back(to_json(b, grp));
  return out;
}

group::Point point_from_json(const json& j, const Backend& grp) {
  return grp.from_hex(hex_string(j));
}

group::Scalar scalar_from_json(const json& j, const Backend& grp) {
  return grp.scalar_from_hex(hex_string(j));
}

crypto::KernelSignature signature_from_json(const json& j, const Backend& grp) {
  return {point_from_json(field(j, "R"), grp), scalar_from_json(field(j, "s"), grp)};
}

crypto::RangeProof range_proof_from_json(const json& j, const Backend& grp) {
  crypto::RangeProof p;
  const json& n = field(j, "n");
  if (!n.is_number_unsigned()) throw DecodeError("range proof width must be unsigned");
  p.bits = n.get<unsigned>();
  for (const auto& c : array(field(j, "bit_commitments"), "bit_commitments")) {
    p.bit_commitments.push_back({point_from_json(c, grp)});
  }
  for (const auto& e : array(field(j, "bit_proofs"), "bit_proofs")) {
    p.bit_proofs.push_back({point_from_json(field(e, "R0"), grp), point_from_json(field(e, "R1"), grp),
                            scalar_from_json(field(e, "c0"), grp), scalar_from_json(field(e, "c1"), grp),
                            scalar_from_json(field(e, "s0"), grp), scalar_from_json(field(e, "s1"), grp)});
  }
  return p;
}

tx::TxKernel kernel_from_json(const json& j, const Backend& grp) {
  tx::TxKernel k;
  k.excess = point_from_json(field(j, "excess"), grp);
  k.signature = signature_from_json(field(j, "sig"), grp);
  for (const auto& p : array(field(j, "range_proofs"), "range_proofs")) {
    k.range_proofs.push_back(range_proof_from_json(p, grp));
  }
  return k;
}

tx::Transaction transaction_from_json(const json& j, const Backend& grp) {
  tx::Transaction t;
  t.inputs = coins_from_json(field(j, "inputs"), grp);
  t.outputs = coins_from_json(field(j, "outputs"), grp);
  t.kernels = kernels_from_json(field(j, "kernels"), grp);
  return t;
}

ledger::Block block_from_json(const json& j, const Backend& grp) {
  ledger::Block b;
  const json& genesis = field(j, "genesis");
  if (!genesis.is_boolean()) throw DecodeError("genesis must be a boolean");
  b.genesis = genesis.get<bool>();
  if (auto it = j.find("supply"); it != j.end()) {
    if (!it->is_number_unsigned()) throw DecodeError("supply must be unsigned");
    b.supply = it->get<std::uint64_t>();
  }
  b.offset = scalar_from_json(field(j, "offset"), grp);
  b.inputs = coins_from_json(field(j, "inputs"), grp);
  b.outputs = coins_from_json(field(j, "outputs"), grp);
  b.kernels = kernels_from_json(field(j, "kernels"), grp);
  return b;
}

ledger::Chain chain_from_json(const json& j, const Backend& grp) {
  ledger::Chain c;
  for (const auto& b : array(j, "chain")) c.blocks.push_back(block_from_json(b, grp));
  return c;
}

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DecodeError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace mw::codec
