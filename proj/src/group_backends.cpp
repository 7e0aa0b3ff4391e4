#include <bit>

#include "mw/group.hpp"
#include "mw/hash.hpp"

namespace mw::group {

namespace {

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::uint64_t hash_counter_value(std::string_view domain, std::string_view tag, std::uint32_t ctr) {
  Hasher h(domain);
  h.update_framed(as_bytes(tag)).update_u64(ctr);
  Digest d = h.finish();
  return get_be(ByteView(d.data(), 8));
}

// Z_q under addition. Elements live in x; y and the infinity flag are unused.
class Transparent final : public Backend {
 public:
  Transparent(std::uint64_t q) : Backend("transparent(q=" + std::to_string(q) + ")", q) {}

  void init(std::uint64_t g, std::uint64_t h) {
    set_generators(make(g % order(), 0, false), make(h % order(), 0, false));
  }

  std::string name() const override { return "transparent"; }

  Point hash_to_group(std::string_view tag) const override {
    if (tag.empty()) throw std::invalid_argument("hash_to_group: empty tag");
    for (std::uint32_t ctr = 0;; ++ctr) {
      std::uint64_t v = hash_counter_value("mw/transparent/h2g", tag, ctr) % order();
      if (v != 0) return make(v, 0, false);
    }
  }

  Bytes serialize(const Point& p) const override {
    Bytes out;
    put_be(out, p.x(), scalar_width());
    return out;
  }

  Point deserialize(ByteView bytes) const override {
    if (bytes.size() != scalar_width()) throw DecodeError("transparent element has wrong width");
    std::uint64_t v = get_be(bytes);
    if (v >= order()) throw DecodeError("transparent element not reduced");
    return make(v, 0, false);
  }

 protected:
  Point identity_raw() const override { return make(0, 0, false); }

  Point add(const Point& a, const Point& b) const override {
    return make((Scalar(a.x(), order()) + Scalar(b.x(), order())).value(), 0, false);
  }

  Point negate(const Point& a) const override {
    return make((-Scalar(a.x(), order())).value(), 0, false);
  }

  Point multiply(const Scalar& k, const Point& p) const override {
    return make(mulmod(k.value(), p.x(), order()), 0, false);
  }
};

// Affine short-Weierstrass arithmetic over a prime field p ≡ 3 (mod 4).
class ToyCurve final : public Backend {
 public:
  using P = ToyCurveParams;

  ToyCurve() : Backend("toycurve(p=1048571,a=1,b=14)", P::order) {}

  void init() { set_generators(hash_to_group("mw/generator/G"), hash_to_group("mw/generator/H")); }

  std::string name() const override { return "toycurve"; }

  Point hash_to_group(std::string_view tag) const override {
    if (tag.empty()) throw std::invalid_argument("hash_to_group: empty tag");
    for (std::uint32_t ctr = 0;; ++ctr) {
      std::uint64_t raw = hash_counter_value("mw/toycurve/h2g", tag, ctr);
      std::uint64_t x = raw % P::p;
      std::uint64_t rhs = curve_rhs(x);
      if (rhs == 0 || powmod(rhs, (P::p - 1) / 2, P::p) != 1) continue;
      std::uint64_t y = powmod(rhs, (P::p + 1) / 4, P::p);
      // Top bit of the digest prefix picks the root.
      if (((raw >> 63) & 1) != (y & 1)) y = P::p - y;
      return make(x, y, false);
    }
  }

  Bytes serialize(const Point& pt) const override {
    Bytes out;
    put_be(out, pt.x(), kCoordWidth);
    put_be(out, pt.y(), kCoordWidth);
    out.push_back(pt.infinity() ? 1 : 0);
    return out;
  }

  Point deserialize(ByteView bytes) const override {
    if (bytes.size() != 2 * kCoordWidth + 1) throw DecodeError("curve point has wrong width");
    std::uint64_t x = get_be(bytes.subspan(0, kCoordWidth));
    std::uint64_t y = get_be(bytes.subspan(kCoordWidth, kCoordWidth));
    std::uint8_t flag = bytes[2 * kCoordWidth];
    if (flag > 1) throw DecodeError("curve point has invalid infinity flag");
    if (flag == 1) {
      if (x != 0 || y != 0) throw DecodeError("point at infinity must have zero coordinates");
      return identity_raw();
    }
    if (x >= P::p || y >= P::p) throw DecodeError("curve coordinate not reduced");
    if (mulmod(y, y, P::p) != curve_rhs(x)) throw DecodeError("point not on curve");
    return make(x, y, false);
  }

 protected:
  Point identity_raw() const override { return make(0, 0, true); }

  Point negate(const Point& a) const override {
    if (a.infinity()) return a;
    return make(a.x(), a.y() == 0 ? 0 : P::p - a.y(), false);
  }

  Point add(const Point& a, const Point& b) const override {
    if (a.infinity()) return b;
    if (b.infinity()) return a;
    std::uint64_t lambda;
    if (a.x() == b.x()) {
      if ((a.y() + b.y()) % P::p == 0) return identity_raw();
      // tangent: (3x^2 + a) / 2y
      std::uint64_t num = (mulmod(3, mulmod(a.x(), a.x(), P::p), P::p) + P::a) % P::p;
      lambda = mulmod(num, inv(mulmod(2, a.y(), P::p)), P::p);
    } else {
      std::uint64_t num = sub(b.y(), a.y());
      lambda = mulmod(num, inv(sub(b.x(), a.x())), P::p);
    }
    std::uint64_t x3 = sub(sub(mulmod(lambda, lambda, P::p), a.x()), b.x());
    std::uint64_t y3 = sub(mulmod(lambda, sub(a.x(), x3), P::p), a.y());
    return make(x3, y3, false);
  }

 private:
  static constexpr std::size_t kCoordWidth = 3;

  static std::uint64_t sub(std::uint64_t a, std::uint64_t b) { return (a + P::p - b) % P::p; }
  static std::uint64_t inv(std::uint64_t a) { return powmod(a, P::p - 2, P::p); }
  static std::uint64_t curve_rhs(std::uint64_t x) {
    return (mulmod(mulmod(x, x, P::p), x, P::p) + mulmod(P::a, x, P::p) + P::b) % P::p;
  }
};

}  // namespace

BackendPtr make_transparent(std::uint64_t q, std::uint64_t g, std::uint64_t h) {
  if (!is_prime(q)) throw std::invalid_argument("transparent backend needs a prime order");
  if (g % q == 0 || h % q == 0 || g % q == h % q) {
    throw std::invalid_argument("transparent generators must be distinct and non-zero");
  }
  auto backend = std::make_shared<Transparent>(q);
  backend->init(g, h);
  return backend;
}

BackendPtr make_toycurve() {
  static const BackendPtr instance = [] {
    auto backend = std::make_shared<ToyCurve>();
    backend->init();
    return BackendPtr(backend);
  }();
  return instance;
}

}  // namespace mw::group
