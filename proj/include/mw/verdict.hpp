#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace mw {

enum class Reason {
  kValid,
  kRangeProof,       // index: output
  kKernelSignature,  // index: kernel
  kUnbalanced,
  kDuplicateInput,   // index: input
  kBalanceEquation,
  kUnknownInput,     // index: input
  kDoubleSpend,      // index: input
  kGenesis,          // genesis flag or genesis shape is wrong
};

std::string_view reason_name(Reason r);
std::optional<Reason> reason_from_name(std::string_view name);

/// Outcome of a validity judgment. Invalidity is a value, not an error.
///
/// `index` locates the offending item inside the transaction or block;
/// `block` is set by chain-level checks.
struct Verdict {
  Reason reason = Reason::kValid;
  std::optional<std::size_t> index;
  std::optional<std::size_t> block;
  std::string detail;

  bool ok() const { return reason == Reason::kValid; }
  explicit operator bool() const { return ok(); }

  static Verdict valid() { return {}; }
  static Verdict invalid(Reason r, std::optional<std::size_t> index = std::nullopt,
                         std::string detail = {}) {
    return {r, index, std::nullopt, std::move(detail)};
  }

  std::string to_string() const;
};

}  // namespace mw
