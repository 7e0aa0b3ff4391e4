#include "mw/bytes.hpp"

#include <openssl/evp.h>

#include "mw/hash.hpp"

namespace mw {

namespace {
int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw DecodeError("hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw DecodeError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

void put_be(Bytes& out, std::uint64_t value, std::size_t width) {
  if (width < 8 && (value >> (8 * width)) != 0) {
    throw std::invalid_argument("value does not fit in fixed width");
  }
  for (std::size_t i = width; i-- > 0;) {
    out.push_back(i >= 8 ? 0 : static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

std::uint64_t get_be(ByteView in) {
  std::uint64_t v = 0;
  for (auto b : in) {
    if (v >> 56) throw DecodeError("integer overflows 64 bits");
    v = v << 8 | b;
  }
  return v;
}

Hasher::Hasher(std::string_view domain) : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 init failed");
  }
  update_framed(as_bytes(domain));
}

Hasher::~Hasher() { EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_)); }

Hasher& Hasher::update(ByteView bytes) {
  EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), bytes.data(), bytes.size());
  return *this;
}

Hasher& Hasher::update_u64(std::uint64_t value) {
  Bytes b;
  put_be(b, value, 8);
  return update(b);
}

Hasher& Hasher::update_framed(ByteView bytes) {
  update_u64(bytes.size());
  return update(bytes);
}

Digest Hasher::finish() {
  Digest d{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(static_cast<EVP_MD_CTX*>(ctx_), d.data(), &len);
  return d;
}

Digest sha256(ByteView bytes) {
  Digest d{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr);
  return d;
}

}  // namespace mw
