#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mw {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Thrown when an external representation (hex, JSON, wire bytes) cannot be decoded.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Big-endian fixed-width encoding; throws if value does not fit.
void put_be(Bytes& out, std::uint64_t value, std::size_t width);
std::uint64_t get_be(ByteView in);

}  // namespace mw
