#include "mw/verdict.hpp"

#include <array>
#include <utility>

namespace mw {

namespace {
constexpr std::array<std::pair<Reason, std::string_view>, 9> kNames{{
    {Reason::kValid, "Valid"},
    {Reason::kRangeProof, "RangeProof"},
    {Reason::kKernelSignature, "KernelSignature"},
    {Reason::kUnbalanced, "Unbalanced"},
    {Reason::kDuplicateInput, "DuplicateInput"},
    {Reason::kBalanceEquation, "BalanceEquation"},
    {Reason::kUnknownInput, "UnknownInput"},
    {Reason::kDoubleSpend, "DoubleSpend"},
    {Reason::kGenesis, "Genesis"},
}};
}  // namespace

std::string_view reason_name(Reason r) {
  for (const auto& [reason, name] : kNames) {
    if (reason == r) return name;
  }
  return "?";
}

std::optional<Reason> reason_from_name(std::string_view name) {
  for (const auto& [reason, n] : kNames) {
    if (n == name) return reason;
  }
  return std::nullopt;
}

std::string Verdict::to_string() const {
  if (ok()) return "Valid";
  std::string s = "Invalid(" + std::string(reason_name(reason));
  if (index) s += " #" + std::to_string(*index);
  if (block) s += " @block " + std::to_string(*block);
  s += ")";
  if (!detail.empty()) s += ": " + detail;
  return s;
}

}  // namespace mw
