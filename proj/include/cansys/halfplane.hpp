#pragma once

// Points of the Riemann sphere, the chordal metric, fractional linear
// transformations and Hausdorff distances between finite point sets.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include "cansys/error.hpp"

namespace cansys {

using complex = std::complex<double>;

/// Imaginary parts in [-kDomainEps, 0) count as rounding noise on the real axis.
inline constexpr double kDomainEps = 1e-9;

/// Finite values beyond this magnitude are treated as infinity by the Weyl
/// coefficient routines before chordal comparisons.
inline constexpr double kInfinityCap = 1e12;

/// A point of the Riemann sphere: a finite complex number or infinity.
///
/// The type itself accepts any complex value so that fractional linear maps
/// are closed on it. Operations that need the closed upper half-plane check
/// `in_closed_upper()` or call `clamp_to_closed_upper()`.
class ExtendedPoint {
 public:
  constexpr ExtendedPoint() = default;
  constexpr ExtendedPoint(complex value) : value_(value) {}  // NOLINT: implicit by design of the API
  constexpr ExtendedPoint(double re, double im = 0.0) : value_(re, im) {}

  static constexpr ExtendedPoint infinity() {
    ExtendedPoint p;
    p.infinite_ = true;
    return p;
  }

  constexpr bool is_infinite() const { return infinite_; }
  constexpr bool is_finite() const { return !infinite_; }

  /// The finite value. Meaningless (zero) for infinity.
  constexpr complex value() const { return value_; }
  constexpr double real() const { return value_.real(); }
  constexpr double imag() const { return value_.imag(); }

  /// Closed upper half-plane including the real line and infinity.
  bool in_closed_upper(double eps = kDomainEps) const {
    return infinite_ || (std::isfinite(value_.real()) && std::isfinite(value_.imag()) &&
                         value_.imag() >= -eps);
  }

  /// On the extended real line R ∪ {∞}.
  bool on_boundary(double eps = 0.0) const {
    return infinite_ || std::abs(value_.imag()) <= eps;
  }

  friend constexpr bool operator==(const ExtendedPoint& a, const ExtendedPoint& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

 private:
  complex value_{0.0, 0.0};
  bool infinite_ = false;
};

using PointCloud = std::vector<ExtendedPoint>;

/// Unit-sphere image under inverse stereographic projection, with 0 at the
/// south pole and ∞ at the north pole.
inline std::array<double, 3> sphere_embed(const ExtendedPoint& p) {
  if (p.is_infinite()) return {0.0, 0.0, 1.0};
  const complex z = p.value();
  const double m = std::abs(z);
  if (m <= 1.0) {
    const double d = 1.0 + m * m;
    return {2.0 * z.real() / d, 2.0 * z.imag() / d, (m * m - 1.0) / d};
  }
  // Divide through by |z|^2 to keep large values finite.
  const complex u = 1.0 / z;
  const double mu = std::abs(u);
  const double d = 1.0 + mu * mu;
  return {2.0 * u.real() / d, -2.0 * u.imag() / d, (1.0 - mu * mu) / d};
}

namespace detail {

// |z| <= 1 and |w| <= 1.
inline double chordal_small(complex z, complex w) {
  return 2.0 * std::abs(z - w) / (std::hypot(1.0, std::abs(z)) * std::hypot(1.0, std::abs(w)));
}

}  // namespace detail

/// Chordal distance on the unit sphere; takes values in [0, 2].
inline double chordal_distance(const ExtendedPoint& p, const ExtendedPoint& q) {
  if (p.is_infinite() && q.is_infinite()) return 0.0;
  if (p.is_infinite()) return 2.0 / std::hypot(1.0, std::abs(q.value()));
  if (q.is_infinite()) return 2.0 / std::hypot(1.0, std::abs(p.value()));
  complex z = p.value();
  complex w = q.value();
  if (std::abs(z) < std::abs(w)) std::swap(z, w);
  double d;
  if (std::abs(z) <= 1.0) {
    d = detail::chordal_small(z, w);
  } else if (std::abs(w) > 1.0) {
    // z -> 1/z is an isometry of the chordal metric.
    d = detail::chordal_small(1.0 / z, 1.0 / w);
  } else {
    const double mz = std::abs(z);
    d = 2.0 * std::abs(1.0 - w / z) / (std::hypot(1.0, 1.0 / mz) * std::hypot(1.0, std::abs(w)));
  }
  return std::clamp(d, 0.0, 2.0);
}

/// Projects a numerically computed value onto the closed upper half-plane of
/// the sphere: tiny negative imaginary parts are zeroed, huge values become ∞.
/// Throws NumericError when the value lies clearly below the real axis.
inline ExtendedPoint clamp_to_closed_upper(const ExtendedPoint& p, double eps = kDomainEps) {
  if (p.is_infinite()) return p;
  const complex z = p.value();
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kInfinityCap) {
    return ExtendedPoint::infinity();
  }
  if (z.imag() >= 0.0) return p;
  if (z.imag() >= -eps * std::max(1.0, std::abs(z))) return ExtendedPoint(z.real(), 0.0);
  throw NumericError("value left the closed upper half-plane", -z.imag());
}

/// 2x2 complex matrix (a, b; c, d).
struct Mat2 {
  complex a{1.0}, b{0.0}, c{0.0}, d{1.0};

  static constexpr Mat2 identity() { return {}; }

  complex det() const { return a * d - b * c; }

  double max_abs() const {
    return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
  }

  /// Entrywise l1 norm.
  double l1_norm() const { return std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d); }

  /// Operator norm induced by the l1 vector norm (largest column sum).
  double induced_l1_norm() const {
    return std::max(std::abs(a) + std::abs(c), std::abs(b) + std::abs(d));
  }

  bool is_zero() const {
    return a == complex{} && b == complex{} && c == complex{} && d == complex{};
  }

  friend Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
  }
  friend Mat2 operator*(complex s, const Mat2& x) {
    return {s * x.a, s * x.b, s * x.c, s * x.d};
  }
  friend Mat2 operator+(const Mat2& x, const Mat2& y) {
    return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
  }
  friend Mat2 operator-(const Mat2& x, const Mat2& y) {
    return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
  }
};

/// A fractional linear transformation; scalar multiples act identically.
using Mobius2 = Mat2;

/// The symplectic unit J = (0, -1; 1, 0), acting as z -> -1/z.
inline constexpr Mat2 kJ{complex{0.0}, complex{-1.0}, complex{1.0}, complex{0.0}};

/// (a p + b) / (c p + d) with the usual conventions at ∞.
/// Throws DomainError for the zero matrix and for the undefined 0/0 case.
inline ExtendedPoint mobius_apply(const Mobius2& m, const ExtendedPoint& p) {
  if (m.is_zero()) throw DomainError("mobius_apply: zero matrix");
  complex num;
  complex den;
  if (p.is_infinite()) {
    num = m.a;
    den = m.c;
  } else if (std::abs(p.value()) > 1.0) {
    const complex u = 1.0 / p.value();
    num = m.a + m.b * u;
    den = m.c + m.d * u;
  } else {
    num = m.a * p.value() + m.b;
    den = m.c * p.value() + m.d;
  }
  if (den == complex{}) {
    if (num == complex{}) throw DomainError("mobius_apply: 0/0 (point in the kernel of a singular matrix)");
    return ExtendedPoint::infinity();
  }
  return ExtendedPoint(num / den);
}

/// Largest chordal distance from a point of `from` to the set `to`.
inline double directed_hausdorff(std::span<const ExtendedPoint> from,
                                 std::span<const ExtendedPoint> to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) {
      best = std::min(best, chordal_distance(p, q));
      if (best <= worst) break;  // cannot raise the maximum any more
    }
    worst = std::max(worst, best);
  }
  return worst;
}

/// Chordal Hausdorff distance, brute force over all pairs.
inline double hausdorff_distance(std::span<const ExtendedPoint> a, std::span<const ExtendedPoint> b) {
  if (a.empty() || b.empty()) throw DomainError("hausdorff_distance: empty point cloud");
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Chordal distance from a point to a finite set.
inline double chordal_distance_to(const ExtendedPoint& p, std::span<const ExtendedPoint> set) {
  if (set.empty()) throw DomainError("chordal_distance_to: empty point cloud");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) best = std::min(best, chordal_distance(p, q));
  return best;
}

}  // namespace cansys
