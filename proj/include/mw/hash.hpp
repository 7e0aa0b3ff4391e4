#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "mw/bytes.hpp"

namespace mw {

using Digest = std::array<std::uint8_t, 32>;

/// Incremental SHA-256 with a domain-separation tag absorbed first.
class Hasher {
 public:
  explicit Hasher(std::string_view domain);
  ~Hasher();
  Hasher(const Hasher&) = delete;
  Hasher& operator=(const Hasher&) = delete;

  Hasher& update(ByteView bytes);
  Hasher& update(std::string_view text) { return update(as_bytes(text)); }
  /// Length-prefixed variant so that concatenations are unambiguous.
  Hasher& update_framed(ByteView bytes);
  Hasher& update_u64(std::uint64_t value);
  Digest finish();

 private:
  void* ctx_;
};

Digest sha256(ByteView bytes);

}  // namespace mw
