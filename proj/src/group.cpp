#include "mw/group.hpp"

#include <bit>

#include "mw/hash.hpp"

namespace mw::group {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

// ---- Scalar ----------------------------------------------------------------

Scalar::Scalar(std::uint64_t value, std::uint64_t order) : value_(value % order), order_(order) {}

namespace {
void check_orders(const Scalar& a, const Scalar& b) {
  if (a.order() == 0 || a.order() != b.order()) {
    throw BackendMismatch("scalars from different groups");
  }
}
}  // namespace

Scalar Scalar::operator-() const {
  if (order_ == 0) throw BackendMismatch("uninitialised scalar");
  return Scalar(value_ == 0 ? 0 : order_ - value_, order_);
}

Scalar Scalar::inverse() const {
  if (value_ == 0) throw std::domain_error("inverse of zero scalar");
  // q is prime: a^(q-2) = a^-1.
  return Scalar(powmod(value_, order_ - 2, order_), order_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  check_orders(a, b);
  std::uint64_t s = a.value_ + b.value_;
  if (s >= a.order_ || s < a.value_) s -= a.order_;
  return Scalar(s, a.order_);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  check_orders(a, b);
  return Scalar(mulmod(a.value_, b.value_, a.order_), a.order_);
}

// ---- Point -----------------------------------------------------------------

const Backend& Point::backend() const {
  if (!backend_) throw BackendMismatch("point has no backend");
  return *backend_;
}

bool Point::is_identity() const { return *this == backend().identity(); }

Bytes Point::serialize() const { return backend().serialize(*this); }

Point Point::operator-() const { return backend().negate(*this); }

Point operator+(const Point& a, const Point& b) {
  a.backend().check_same(b.backend());
  return a.backend().add(a, b);
}

Point operator-(const Point& a, const Point& b) { return a + (-b); }

Point operator*(const Scalar& k, const Point& p) {
  p.backend().check_scalar(k);
  return p.backend().multiply(k, p);
}

bool operator==(const Point& a, const Point& b) {
  if (!a.backend_ || !b.backend_) return a.backend_ == b.backend_;
  if (a.backend_ != b.backend_ && a.backend_->id() != b.backend_->id()) return false;
  return a.x_ == b.x_ && a.y_ == b.y_ && a.infinity_ == b.infinity_;
}

// ---- Backend ---------------------------------------------------------------

Point Backend::identity() const { return identity_raw(); }

void Backend::set_generators(Point g, Point h) {
  g_ = std::move(g);
  h_ = std::move(h);
}

Point Backend::multiply(const Scalar& k, const Point& p) const {
  Point acc = identity_raw();
  Point base = p;
  for (std::uint64_t e = k.value(); e != 0; e >>= 1) {
    if (e & 1) acc = add(acc, base);
    base = add(base, base);
  }
  return acc;
}

Scalar Backend::scalar_from_bytes(ByteView bytes) const {
  std::uint64_t acc = 0;
  for (auto b : bytes) acc = (mulmod(acc, 256, order_) + b) % order_;
  return Scalar(acc, order_);
}

std::size_t Backend::scalar_width() const {
  return static_cast<std::size_t>((std::bit_width(order_ - 1) + 7) / 8);
}

Bytes Backend::serialize(const Scalar& s) const {
  check_scalar(s);
  Bytes out;
  put_be(out, s.value(), scalar_width());
  return out;
}

Scalar Backend::deserialize_scalar(ByteView bytes) const {
  if (bytes.size() != scalar_width()) throw DecodeError("scalar has wrong width");
  std::uint64_t v = get_be(bytes);
  if (v >= order_) throw DecodeError("scalar not reduced");
  return Scalar(v, order_);
}

void Backend::check_same(const Backend& other) const {
  if (this != &other && id_ != other.id_) {
    throw BackendMismatch("group elements from '" + id_ + "' and '" + other.id_ + "'");
  }
}

void Backend::check_scalar(const Scalar& s) const {
  if (s.order() != order_) throw BackendMismatch("scalar modulus does not match group order");
}

BackendPtr make_backend(std::string_view name) {
  if (name == "transparent") return make_transparent();
  if (name == "toycurve") return make_toycurve();
  throw std::invalid_argument("unknown group backend: " + std::string(name));
}

}  // namespace mw::group
