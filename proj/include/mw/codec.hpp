#pragma once

// JSON wire forms. Group values are hex strings of their canonical
// serialization; openings and kernel secrets are never written.

#include <json.hpp>

#include "mw/ledger.hpp"

namespace mw::codec {

using json = nlohmann::json;
using group::Backend;

json to_json(const group::Point& p);
json to_json(const group::Scalar& s, const Backend& grp);
json to_json(const crypto::KernelSignature& sig, const Backend& grp);
json to_json(const crypto::RangeProof& proof, const Backend& grp);
json to_json(const tx::TxKernel& k, const Backend& grp);
json to_json(const tx::Transaction& t, const Backend& grp);
json to_json(const ledger::Block& b, const Backend& grp);
json to_json(const ledger::Chain& c, const Backend& grp);

// Decoders throw mw::DecodeError on any malformed field.
group::Point point_from_json(const json& j, const Backend& grp);
group::Scalar scalar_from_json(const json& j, const Backend& grp);
crypto::KernelSignature signature_from_json(const json& j, const Backend& grp);
crypto::RangeProof range_proof_from_json(const json& j, const Backend& grp);
tx::TxKernel kernel_from_json(const json& j, const Backend& grp);
tx::Transaction transaction_from_json(const json& j, const Backend& grp);
ledger::Block block_from_json(const json& j, const Backend& grp);
ledger::Chain chain_from_json(const json& j, const Backend& grp);

/// Parses text; wraps parser failures in DecodeError.
json parse(std::string_view text);

}  // namespace mw::codec
