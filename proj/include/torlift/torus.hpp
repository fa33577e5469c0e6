#pragma once

// Exact torus arithmetic: rational angles, GL(n,Z) automorphisms, the
// standard representation on C^n in polar form and its moment map.

#include <boost/rational.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "torlift/errors.hpp"

// boost 1.74 spells integer == rational as a template that C++20 rewrites
// back into itself; exact-match overloads take precedence.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a.denominator() == 1 && a.numerator() == b; }
inline bool operator==(int b, const rational<std::int64_t>& a) { return a == b; }
inline bool operator==(const rational<std::int64_t>& a, long b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(long b, const rational<std::int64_t>& a) { return a == b; }
}  // namespace boost

namespace torlift {

using Rational = boost::rational<std::int64_t>;

namespace detail {

inline std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw InputError("integer overflow in exact arithmetic");
  }
  return static_cast<std::int64_t>(v);
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline std::int64_t mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::int64_t parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw InputError("expected an integer, got empty text");
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) throw InputError("expected an integer, got '" + std::string(s) + "'");
  __int128 v = 0;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') {
      throw InputError("expected an integer, got '" + std::string(s) + "'");
    }
    v = v * 10 + (s[i] - '0');
    if (v > static_cast<__int128>(INT64_MAX)) throw InputError("integer out of range: " + std::string(s));
  }
  return static_cast<std::int64_t>(neg ? -v : v);
}

}  // namespace detail

inline Rational parse_rational(std::string_view text) {
  text = detail::trim(text);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(detail::parse_int(text));
  std::int64_t p = detail::parse_int(text.substr(0, slash));
  std::int64_t q = detail::parse_int(text.substr(slash + 1));
  if (q == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  return Rational(p, q);
}

inline std::string to_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// A point of the circle R/Z, kept as a reduced fraction in [0,1).
class Angle {
 public:
  Angle() = default;
  explicit Angle(const Rational& r) : value_(reduce(r)) {}
  Angle(std::int64_t p, std::int64_t q) : Angle(Rational(p, q)) {}

  static Angle parse(std::string_view text) { return Angle(parse_rational(text)); }

  const Rational& value() const { return value_; }
  std::int64_t numerator() const { return value_.numerator(); }
  std::int64_t denominator() const { return value_.denominator(); }
  bool is_zero() const { return value_.numerator() == 0; }

  Angle operator+(const Angle& o) const { return Angle(value_ + o.value_); }
  Angle operator-(const Angle& o) const { return Angle(value_ - o.value_); }
  Angle operator-() const { return Angle(-value_); }
  Angle operator*(std::int64_t k) const {
    // reduce k first so that the product stays small
    std::int64_t d = value_.denominator();
    std::int64_t kk = detail::mod(k, d);
    return Angle(Rational(detail::checked(static_cast<__int128>(value_.numerator()) * kk), d));
  }

  friend bool operator==(const Angle& a, const Angle& b) { return a.value_ == b.value_; }
  friend std::strong_ordering operator<=>(const Angle& a, const Angle& b) {
    if (a.value_ < b.value_) return std::strong_ordering::less;
    if (b.value_ < a.value_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  std::string str() const {
    return std::to_string(value_.numerator()) + "/" + std::to_string(value_.denominator());
  }

 private:
  static Rational reduce(const Rational& r) {
    std::int64_t fl = detail::floor_div(r.numerator(), r.denominator());
    return r - Rational(fl);
  }

  Rational value_{0};
};

/// An element of T^n = (R/Z)^n.
struct TorusPoint {
  std::vector<Angle> angles;

  TorusPoint() = default;
  explicit TorusPoint(std::vector<Angle> a) : angles(std::move(a)) {}
  static TorusPoint zero(std::size_t n) { return TorusPoint(std::vector<Angle>(n)); }

  std::size_t size() const { return angles.size(); }
  const Angle& operator[](std::size_t i) const { return angles[i]; }

  TorusPoint operator+(const TorusPoint& o) const {
    require_same(o);
    TorusPoint r = *this;
    for (std::size_t i = 0; i < size(); ++i) r.angles[i] = angles[i] + o.angles[i];
    return r;
  }
  TorusPoint operator-() const {
    TorusPoint r = *this;
    for (auto& a : r.angles) a = -a;
    return r;
  }
  TorusPoint operator-(const TorusPoint& o) const { return *this + (-o); }

  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
  friend auto operator<=>(const TorusPoint&, const TorusPoint&) = default;

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < size(); ++i) {
      if (i) s += ", ";
      s += angles[i].str();
    }
    return s + ")";
  }

 private:
  void require_same(const TorusPoint& o) const {
    if (o.size() != size()) {
      throw DimensionError("torus points of rank " + std::to_string(size()) + " and " +
                           std::to_string(o.size()));
    }
  }
};

namespace detail {

// Fraction-free Gaussian elimination (Bareiss); exact for integer input.
inline std::int64_t determinant(std::size_t n, std::vector<std::int64_t> a) {
  if (n == 0) return 1;
  std::vector<__int128> m(a.begin(), a.end());
  auto at = [&](std::size_t i, std::size_t j) -> __int128& { return m[i * n + j]; };
  int sign = 1;
  __int128 prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (at(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && at(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(at(k, j), at(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        at(i, j) = (at(i, j) * at(k, k) - at(i, k) * at(k, j)) / prev;
      }
    }
    prev = at(k, k);
  }
  return checked(sign * at(n - 1, n - 1));
}

}  // namespace detail

/// An automorphism of T^n, i.e. an element of GL(n,Z).
class TorusAut {
 public:
  TorusAut() = default;
  TorusAut(std::size_t n, std::vector<std::int64_t> entries) : n_(n), a_(std::move(entries)) {
    if (a_.size() != n_ * n_) {
      throw DimensionError("matrix of dimension " + std::to_string(n_) + " needs " +
                           std::to_string(n_ * n_) + " entries");
    }
    std::int64_t d = detail::determinant(n_, a_);
    if (d != 1 && d != -1) {
      throw InvariantError("torus automorphism must be unimodular (|det| = 1), got det = " +
                           std::to_string(d) + " for " + str());
    }
  }

  static TorusAut from_rows(const std::vector<std::vector<std::int64_t>>& rows) {
    std::vector<std::int64_t> e;
    for (const auto& r : rows) {
      if (r.size() != rows.size()) throw DimensionError("matrix rows must form a square");
      e.insert(e.end(), r.begin(), r.end());
    }
    return TorusAut(rows.size(), std::move(e));
  }

  static TorusAut identity(std::size_t n) {
    std::vector<std::int64_t> e(n * n, 0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1;
    return TorusAut(n, std::move(e), Trusted{});
  }

  std::size_t dim() const { return n_; }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  const std::vector<std::int64_t>& entries() const { return a_; }
  std::int64_t determinant() const { return detail::determinant(n_, a_); }
  bool is_identity() const { return *this == identity(n_); }

  TorusAut operator*(const TorusAut& o) const {
    if (o.n_ != n_) throw DimensionError("matrix product of mismatched dimensions");
    std::vector<std::int64_t> e(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        __int128 s = 0;
        for (std::size_t k = 0; k < n_; ++k) s += static_cast<__int128>((*this)(i, k)) * o(k, j);
        e[i * n_ + j] = detail::checked(s);
      }
    }
    return TorusAut(n_, std::move(e), Trusted{});
  }

  TorusAut inverse() const {
    // Gauss-Jordan over Q; the result is integral because det = +-1.
    std::vector<Rational> m(n_ * 2 * n_, Rational(0));
    const std::size_t w = 2 * n_;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) m[i * w + j] = Rational((*this)(i, j));
      m[i * w + n_ + i] = Rational(1);
    }
    for (std::size_t c = 0; c < n_; ++c) {
      std::size_t p = c;
      while (m[p * w + c] == 0) ++p;
      if (p != c) {
        for (std::size_t j = 0; j < w; ++j) std::swap(m[p * w + j], m[c * w + j]);
      }
      Rational piv = m[c * w + c];
      for (std::size_t j = 0; j < w; ++j) m[c * w + j] /= piv;
      for (std::size_t i = 0; i < n_; ++i) {
        if (i == c || m[i * w + c] == 0) continue;
        Rational f = m[i * w + c];
        for (std::size_t j = 0; j < w; ++j) m[i * w + j] -= f * m[c * w + j];
      }
    }
    std::vector<std::int64_t> e(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) e[i * n_ + j] = m[i * w + n_ + j].numerator();
    }
    return TorusAut(n_, std::move(e), Trusted{});
  }

  TorusAut pow(std::int64_t k) const {
    TorusAut base = k < 0 ? inverse() : *this;
    std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-k) : static_cast<std::uint64_t>(k);
    TorusAut r = identity(n_);
    while (e) {
      if (e & 1) r = r * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return r;
  }

  friend bool operator==(const TorusAut&, const TorusAut&) = default;
  friend auto operator<=>(const TorusAut&, const TorusAut&) = default;

  /// Row-major nested array text, e.g. "[[1,0],[-1,1]]".
  std::string str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < n_; ++i) {
      s += i ? ",[" : "[";
      for (std::size_t j = 0; j < n_; ++j) {
        if (j) s += ",";
        s += std::to_string((*this)(i, j));
      }
      s += "]";
    }
    return s + "]";
  }

 private:
  struct Trusted {};
  TorusAut(std::size_t n, std::vector<std::int64_t> e, Trusted) : n_(n), a_(std::move(e)) {}

  std::size_t n_ = 0;
  std::vector<std::int64_t> a_;
};

/// theta -> M theta (mod 1).
inline TorusPoint apply_aut(const TorusAut& m, const TorusPoint& u) {
  if (m.dim() != u.size()) {
    throw DimensionError("automorphism of rank " + std::to_string(m.dim()) +
                         " applied to a torus point of rank " + std::to_string(u.size()));
  }
  TorusPoint r = TorusPoint::zero(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    Angle s;
    for (std::size_t j = 0; j < u.size(); ++j) s = s + u[j] * m(i, j);
    r.angles[i] = s;
  }
  return r;
}

struct PolarCoord {
  Rational r2{0};  // |z_i|^2
  Angle theta;

  friend bool operator==(const PolarCoord&, const PolarCoord&) = default;
  friend auto operator<=>(const PolarCoord& a, const PolarCoord& b) {
    if (a.r2 != b.r2) return a.r2 < b.r2 ? std::strong_ordering::less : std::strong_ordering::greater;
    return a.theta <=> b.theta;
  }
};

/// A point of C^n in polar form, with the phase pinned to 0 where |z_i| = 0.
class PolarPoint {
 public:
  PolarPoint() = default;
  explicit PolarPoint(std::vector<PolarCoord> coords) : c_(std::move(coords)) {
    for (const auto& c : c_) {
      if (c.r2 < 0) throw InvariantError("|z_i|^2 must be nonnegative, got " + to_string(c.r2));
      if (c.r2 == 0 && !c.theta.is_zero()) {
        throw InvariantError("phase must be 0 at a vanishing coordinate");
      }
    }
  }

  /// Builds a point and drops phases on vanishing coordinates.
  static PolarPoint canonical(const std::vector<Rational>& r2, const TorusPoint& theta) {
    if (r2.size() != theta.size()) throw DimensionError("polar point: r2/theta length mismatch");
    std::vector<PolarCoord> c(r2.size());
    for (std::size_t i = 0; i < r2.size(); ++i) {
      c[i].r2 = r2[i];
      c[i].theta = r2[i] == 0 ? Angle() : theta[i];
    }
    return PolarPoint(std::move(c));
  }

  std::size_t size() const { return c_.size(); }
  const PolarCoord& operator[](std::size_t i) const { return c_[i]; }
  const std::vector<PolarCoord>& coords() const { return c_; }

  std::vector<Rational> r2() const {
    std::vector<Rational> r;
    for (const auto& c : c_) r.push_back(c.r2);
    return r;
  }
  TorusPoint phases() const {
    TorusPoint t = TorusPoint::zero(size());
    for (std::size_t i = 0; i < size(); ++i) t.angles[i] = c_[i].theta;
    return t;
  }

  friend bool operator==(const PolarPoint&, const PolarPoint&) = default;
  friend auto operator<=>(const PolarPoint&, const PolarPoint&) = default;

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < size(); ++i) {
      if (i) s += ", ";
      s += "(" + to_string(c_[i].r2) + "," + c_[i].theta.str() + ")";
    }
    return s + ")";
  }

 private:
  std::vector<PolarCoord> c_;
};

/// A point of the positive cone R^n_+.
struct CornerPoint {
  std::vector<Rational> xi;

  CornerPoint() = default;
  explicit CornerPoint(std::vector<Rational> v) : xi(std::move(v)) {
    for (const auto& x : xi) {
      if (x < 0) throw InvariantError("corner coordinates must be nonnegative");
    }
  }
  friend bool operator==(const CornerPoint&, const CornerPoint&) = default;
};

/// Coordinatewise complex multiplication by u.
inline PolarPoint standard_act(const TorusPoint& u, const PolarPoint& z) {
  if (u.size() != z.size()) {
    throw DimensionError("standard action: torus rank " + std::to_string(u.size()) +
                         " vs point dimension " + std::to_string(z.size()));
  }
  std::vector<PolarCoord> c = z.coords();
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].r2 > 0) c[i].theta = c[i].theta + u[i];
  }
  return PolarPoint(std::move(c));
}

inline CornerPoint moment_map(const PolarPoint& z) { return CornerPoint(z.r2()); }

/// Zero-based indices of the vanishing coordinates; the codimension of the
/// stratum is the size of the result.
inline std::vector<std::size_t> stratum(const CornerPoint& xi) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < xi.xi.size(); ++i) {
    if (xi.xi[i] == 0) s.push_back(i);
  }
  return s;
}

/// The finite subgroup (Z/m)^n of T^n, with elements addressed by a
/// mixed-radix index. Coordinate i of an element is the numerator k_i of
/// the angle k_i/m.
class TorusGrid {
 public:
  TorusGrid() = default;
  TorusGrid(std::size_t rank, std::int64_t order) : n_(rank), m_(order) {
    if (m_ < 1) throw InvariantError("torus order must be >= 1");
    size_ = 1;
    for (std::size_t i = 0; i < n_; ++i) size_ *= static_cast<std::size_t>(m_);
  }

  std::size_t rank() const { return n_; }
  std::int64_t order() const { return m_; }
  std::size_t size() const { return size_; }

  std::vector<std::int64_t> coords(std::size_t idx) const {
    std::vector<std::int64_t> c(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      c[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(m_));
      idx /= static_cast<std::size_t>(m_);
    }
    return c;
  }
  std::size_t index(const std::vector<std::int64_t>& c) const {
    std::size_t idx = 0;
    for (std::size_t i = n_; i-- > 0;) {
      idx = idx * static_cast<std::size_t>(m_) + static_cast<std::size_t>(detail::mod(c[i], m_));
    }
    return idx;
  }

  std::size_t add(std::size_t a, std::size_t b) const {
    const auto m = static_cast<std::size_t>(m_);
    std::size_t idx = 0, scale = 1;
    for (std::size_t i = 0; i < n_; ++i) {
      idx += ((a % m + b % m) % m) * scale;
      a /= m, b /= m, scale *= m;
    }
    return idx;
  }
  std::size_t neg(std::size_t a) const {
    auto c = coords(a);
    for (auto& x : c) x = -x;
    return index(c);
  }
  std::size_t generator(std::size_t i) const {
    std::vector<std::int64_t> c(n_, 0);
    c[i] = 1;
    return index(c);
  }
  std::size_t apply(const TorusAut& m, std::size_t a) const {
    auto c = coords(a);
    std::vector<std::int64_t> r(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      __int128 s = 0;
      for (std::size_t j = 0; j < n_; ++j) s += static_cast<__int128>(detail::mod(m(i, j), m_)) * c[j];
      r[i] = static_cast<std::int64_t>(s % m_);
    }
    return index(r);
  }

  TorusPoint point(std::size_t idx) const {
    auto c = coords(idx);
    TorusPoint t = TorusPoint::zero(n_);
    for (std::size_t i = 0; i < n_; ++i) t.angles[i] = Angle(c[i], m_);
    return t;
  }
  /// Index of u when every denominator divides the order.
  std::optional<std::size_t> locate(const TorusPoint& u) const {
    if (u.size() != n_) throw DimensionError("torus point rank does not match grid rank");
    std::vector<std::int64_t> c(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (m_ % u[i].denominator() != 0) return std::nullopt;
      c[i] = u[i].numerator() * (m_ / u[i].denominator());
    }
    return index(c);
  }

 private:
  std::size_t n_ = 0;
  std::int64_t m_ = 1;
  std::size_t size_ = 1;
};

}  // namespace torlift
