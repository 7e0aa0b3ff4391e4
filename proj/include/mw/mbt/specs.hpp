#pragma once

#include <memory>
#include <string>
#include <vector>

#include "mw/consensus.hpp"
#include "mw/mbt/ttf.hpp"

namespace mw::mbt {

// Abstract models of the shipped transitions. Variable order is witness order.
//
// rcv_addr      vars origin, dest, kind, asm, as over the peers {a1, a2, a3, this}
// rcv_connect   vars origin, dest, kind, as
// validate_transaction
//               vars ins (spent coins among c1..c3), nout, tamper, amount
//               (value of each spent coin); output verdict
TransitionSpec rcv_addr_spec();
TransitionSpec rcv_connect_spec();
TransitionSpec validate_transaction_spec();

std::vector<std::string> transitions();
/// Throws std::invalid_argument on an unknown name.
TransitionSpec spec_for(const std::string& transition);
/// Tactic schedule used when none is given.
std::vector<Tactic> default_schedule(const std::string& transition);

/// "model" followed by the mutants shipped for `transition`.
std::vector<std::string> suts(const std::string& transition);
/// Throws std::invalid_argument on an unknown transition or SUT.
std::unique_ptr<SutAdapter> make_adapter(const std::string& transition, const std::string& sut);

/// A peer transition under test: same signature as consensus::rcv_addr.
using PeerFn = std::function<std::optional<consensus::Outcome>(const consensus::Addr&,
                                                               const consensus::LocState&,
                                                               const consensus::Packet&)>;
/// Adapter for rcv_addr or rcv_connect implementations.
std::unique_ptr<SutAdapter> peer_adapter(std::string name, PeerFn fn);

using ValidateFn = std::function<Verdict(const tx::Transaction&, const tx::Params&)>;
/// Adapter for validate_transaction implementations: transparent group, 4-bit
/// range proofs.
std::unique_ptr<SutAdapter> validate_adapter(std::string name, ValidateFn fn);

/// vis, then each tactic below every leaf, then prune and generate.
Suite make_suite(const TransitionSpec& spec, const std::vector<Tactic>& schedule,
                 std::size_t budget = 1'000'000, unsigned jobs = 1);

}  // namespace mw::mbt
