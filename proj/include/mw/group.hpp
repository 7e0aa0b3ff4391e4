#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mw/bytes.hpp"

namespace mw::group {

class Backend;
using BackendPtr = std::shared_ptr<const Backend>;

/// Raised when operands from two different groups meet.
class BackendMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Element of Z_q for the prime order q of some backend.
///
/// A default-constructed scalar has order 0 and is unusable for arithmetic; it
/// exists only so that scalars can live in aggregates.
class Scalar {
 public:
  Scalar() = default;
  Scalar(std::uint64_t value, std::uint64_t order);

  std::uint64_t value() const { return value_; }
  std::uint64_t order() const { return order_; }
  bool is_zero() const { return value_ == 0; }

  Scalar operator-() const;
  Scalar inverse() const;  // throws std::domain_error on zero

  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }

  friend bool operator==(const Scalar&, const Scalar&) = default;
  friend auto operator<=>(const Scalar&, const Scalar&) = default;

 private:
  std::uint64_t value_ = 0;
  std::uint64_t order_ = 0;
};

/// Group element. Carries its backend so that mixing groups is detected.
class Point {
 public:
  Point() = default;
  Point(BackendPtr backend, std::uint64_t x, std::uint64_t y, bool infinity)
      : backend_(std::move(backend)), x_(x), y_(y), infinity_(infinity) {}

  const Backend& backend() const;
  const BackendPtr& backend_ptr() const { return backend_; }
  bool valid() const { return backend_ != nullptr; }

  std::uint64_t x() const { return x_; }
  std::uint64_t y() const { return y_; }
  bool infinity() const { return infinity_; }
  bool is_identity() const;

  Bytes serialize() const;
  std::string hex() const { return to_hex(serialize()); }

  Point operator-() const;
  friend Point operator+(const Point& a, const Point& b);
  friend Point operator-(const Point& a, const Point& b);
  friend Point operator*(const Scalar& k, const Point& p);
  Point& operator+=(const Point& o) { return *this = *this + o; }
  Point& operator-=(const Point& o) { return *this = *this - o; }

  friend bool operator==(const Point& a, const Point& b);

 private:
  BackendPtr backend_;
  std::uint64_t x_ = 0;
  std::uint64_t y_ = 0;
  bool infinity_ = true;
};

/// A prime-order cyclic group with two independent generators.
///
/// G blinds commitments and carries signatures; H carries values. Everything
/// above this layer only sees Scalar and Point.
class Backend : public std::enable_shared_from_this<Backend> {
 public:
  virtual ~Backend() = default;

  /// Short name ("transparent", "toycurve").
  virtual std::string name() const = 0;
  /// Name plus parameters; two backends with equal ids are interchangeable.
  const std::string& id() const { return id_; }
  std::uint64_t order() const { return order_; }

  Point identity() const;
  const Point& g() const { return g_; }
  const Point& h() const { return h_; }

  Scalar scalar(std::uint64_t v) const { return Scalar(v, order_); }
  /// Reduces a digest (or any byte string) modulo q.
  Scalar scalar_from_bytes(ByteView bytes) const;

  virtual Point hash_to_group(std::string_view tag) const = 0;

  virtual Bytes serialize(const Point& p) const = 0;
  virtual Point deserialize(ByteView bytes) const = 0;
  Point from_hex(std::string_view hex) const { return deserialize(mw::from_hex(hex)); }

  std::size_t scalar_width() const;
  Bytes serialize(const Scalar& s) const;
  Scalar deserialize_scalar(ByteView bytes) const;
  Scalar scalar_from_hex(std::string_view hex) const {
    return deserialize_scalar(mw::from_hex(hex));
  }

  void check_same(const Backend& other) const;
  void check_scalar(const Scalar& s) const;

 protected:
  Backend(std::string id, std::uint64_t order) : id_(std::move(id)), order_(order) {}

  virtual Point identity_raw() const = 0;
  virtual Point add(const Point& a, const Point& b) const = 0;
  virtual Point negate(const Point& a) const = 0;
  virtual Point multiply(const Scalar& k, const Point& p) const;
  Point make(std::uint64_t x, std::uint64_t y, bool inf) const {
    return Point(shared_from_this(), x, y, inf);
  }
  void set_generators(Point g, Point h);

  friend class Point;
  friend Point operator+(const Point& a, const Point& b);
  friend Point operator*(const Scalar& k, const Point& p);

 private:
  std::string id_;
  std::uint64_t order_;
  Point g_;
  Point h_;
};

/// Additive group Z_q: discrete logs are visible, which makes it an oracle for
/// protocol arithmetic. Binding is not modelled.
BackendPtr make_transparent(std::uint64_t q = 7919, std::uint64_t g = 1, std::uint64_t h = 5657);

/// Short-Weierstrass curve y^2 = x^3 + x + 14 over F_1048571, prime order 1047587.
BackendPtr make_toycurve();

struct ToyCurveParams {
  static constexpr std::uint64_t p = 1048571;
  static constexpr std::uint64_t a = 1;
  static constexpr std::uint64_t b = 14;
  static constexpr std::uint64_t order = 1047587;
};

/// "transparent" or "toycurve"; throws std::invalid_argument otherwise.
BackendPtr make_backend(std::string_view name);

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);

}  // namespace mw::group
