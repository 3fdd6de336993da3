#pragma once

// Fundamental solutions W(H; t, z) of the canonical system
//   ∂_t W(t, z) J = z W(t, z) H(t),  W(0, z) = I,
// as ordered products of closed-form transfer matrices over constant pieces,
// kept projectively normalized, plus the power series in z as an independent
// route.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cansys/error.hpp"
#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"

namespace cansys {

/// W = e^log_scale * entries, with the largest entry of `entries` in [1/2, 1).
struct TransferMatrix {
  Mat2 entries = Mat2::identity();
  double log_scale = 0.0;

  static TransferMatrix identity() { return {Mat2::identity(), 0.0}; }

  static TransferMatrix from_matrix(const Mat2& m, double log_scale = 0.0) {
    TransferMatrix t{m, log_scale};
    t.normalize();
    return t;
  }

  /// Rescales the entries by a power of two (exact) and books the factor.
  void normalize() {
    const double m = entries.max_abs();
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw NumericError("transfer matrix degenerated (zero or non-finite entries)", m);
    }
    int e = 0;
    std::frexp(m, &e);
    const double s = std::ldexp(1.0, -e);
    entries = complex{s} * entries;
    log_scale += e * std::log(2.0);
  }

  /// The unnormalized matrix; only meaningful while e^log_scale is representable.
  Mat2 matrix() const { return complex{std::exp(log_scale)} * entries; }

  /// det of the true matrix, det(entries) * e^{2 log_scale}.
  complex det() const { return entries.det() * std::exp(2.0 * log_scale); }

  friend TransferMatrix operator*(const TransferMatrix& x, const TransferMatrix& y) {
    TransferMatrix out{x.entries * y.entries, x.log_scale + y.log_scale};
    out.normalize();
    return out;
  }
};

/// Bound for |det W - 1| when det W is recomputed from the entries:
/// relative 1e-9, or the cancellation floor 64 eps ||W||^2 once W is large.
inline double determinant_tolerance(const TransferMatrix& w) {
  return std::max(1e-9, 64.0 * std::numeric_limits<double>::epsilon() * std::exp(2.0 * w.log_scale));
}

/// A fundamental solution together with the certified relative error from
/// dropping the part of H near t = 0.
struct CertifiedTransfer {
  TransferMatrix transfer;
  double truncation_bound = 0.0;
};

namespace detail {

// H J = (h3, -h1; h2, -h3), traceless with (HJ)^2 = -det(H) I.
inline Mat2 hj(const HMatrix& h) { return {complex{h.h3}, complex{-h.h1}, complex{h.h2}, complex{-h.h3}}; }

// sin(y) / y for small |y|
inline complex sinc_series(complex y) {
  const complex y2 = y * y;
  return 1.0 - y2 / 6.0 * (1.0 - y2 / 20.0 * (1.0 - y2 / 42.0));
}

}  // namespace detail

/// exp(-z ℓ H J) for constant H: cos(√d zℓ) I - sin(√d zℓ)/√d · HJ with
/// d = det H, which reduces to I - zℓ HJ when d = 0.
inline TransferMatrix piece_transfer(const HMatrix& h, double length, complex z) {
  if (!(length >= 0.0) || !std::isfinite(length)) throw DomainError("piece_transfer: invalid length");
  const complex x = z * length;
  const double d = std::max(0.0, h.det());
  const double sd = std::sqrt(d);
  const complex y = sd * x;
  const double s = std::abs(y.imag());
  complex a;
  complex b;  // coefficient of -HJ
  double log_scale = 0.0;
  if (s <= 1.0) {
    if (std::abs(y) < 1e-4) {
      a = std::cos(y);
      b = x * detail::sinc_series(y);
    } else {
      a = std::cos(y);
      b = std::sin(y) / sd;
    }
  } else {
    // Factor e^s out of cos and sin so nothing overflows.
    const complex iy{-y.imag(), y.real()};
    const complex ep = std::exp(iy - s);
    const complex em = std::exp(-iy - s);
    a = 0.5 * (ep + em);
    b = (ep - em) / complex{0.0, 2.0} / sd;
    log_scale = s;
  }
  const Mat2 m = detail::hj(h);
  return TransferMatrix::from_matrix(Mat2{a - b * m.a, -b * m.b, -b * m.c, a - b * m.d}, log_scale);
}

using PieceKernel = TransferMatrix (*)(const HMatrix&, double, complex);

/// Product of piece transfers over the segments of H in (e^log_lo, e^log_hi],
/// leftmost factor nearest t = 0.
inline TransferMatrix transfer_over_log(const PiecewiseHamiltonian& H, double log_lo, double log_hi, complex z,
                                        PieceKernel kernel = &piece_transfer) {
  TransferMatrix w = TransferMatrix::identity();
  for (const auto& s : H.segments(log_lo, log_hi)) {
    w = w * kernel(s.h, log_interval_length(s.log_left, s.log_right), z);
  }
  return w;
}

/// Solution operator from t0 to t1 (0 <= t0 < t1) for a Hamiltonian without
/// a staircase below t0, or with t0 > 0.
inline TransferMatrix transfer_between(const PiecewiseHamiltonian& H, double t0, double t1, complex z) {
  if (!(t0 >= 0.0) || !(t1 > t0)) throw DomainError("transfer_between: need 0 <= t0 < t1");
  return transfer_over_log(H, t0 == 0.0 ? kNegInf : std::log(t0), std::log(t1), z);
}

/// W(H; T, z). Pieces of a staircase below t_* are dropped once
/// e^{2 t_* |z|} - 1 <= trunc_tol, which bounds ||W(H; t_*, z) - I||.
inline CertifiedTransfer fundamental_solution(const PiecewiseHamiltonian& H, double T, complex z,
                                              double trunc_tol = 1e-12, PieceKernel kernel = &piece_transfer) {
  if (!(T > 0.0)) throw DomainError("fundamental_solution: T must be positive");
  if (!(trunc_tol > 0.0)) throw DomainError("fundamental_solution: trunc_tol must be positive");
  if (z == complex{}) return {TransferMatrix::identity(), 0.0};
  const double log_T = std::log(T);
  if (!H.has_staircase()) return {transfer_over_log(H, kNegInf, log_T, z, kernel), 0.0};

  const double az = std::abs(z);
  const double t_star = std::log1p(trunc_tol) / (2.0 * az);
  const double log_lo = std::log(t_star);
  if (log_lo >= log_T) return {TransferMatrix::identity(), std::expm1(2.0 * T * az)};
  try {
    return {transfer_over_log(H, log_lo, log_T, z, kernel), std::expm1(2.0 * t_star * az)};
  } catch (const NumericError& e) {
    throw NumericError("fundamental_solution: truncation tolerance unreachable within the materialization cap",
                       std::expm1(2.0 * e.achieved_bound() * az));
  }
}

/// A point pushed through the Weyl disk map of W(H; T, z).
struct CertifiedPoint {
  ExtendedPoint value;
  double truncation_bound = 0.0;
};

/// M(W(H; T, z), p), applying the piece maps one at a time from the top
/// piece down. Every factor maps the upper half-plane into itself, so
/// rounding errors are not amplified the way they are when the product
/// matrix is formed first and is nearly singular projectively. Truncation
/// as in fundamental_solution; the dropped factor moves the result by at
/// most truncation_displacement(truncation_bound) chordally.
inline CertifiedPoint propagate_point(const PiecewiseHamiltonian& H, double T, complex z, const ExtendedPoint& p,
                                      double trunc_tol = 1e-12, PieceKernel kernel = &piece_transfer) {
  if (!(T > 0.0)) throw DomainError("propagate_point: T must be positive");
  if (!(trunc_tol > 0.0)) throw DomainError("propagate_point: trunc_tol must be positive");
  if (z == complex{}) return {p, 0.0};
  const double log_T = std::log(T);
  double log_lo = kNegInf;
  double bound = 0.0;
  if (H.has_staircase()) {
    const double az = std::abs(z);
    const double t_star = std::log1p(trunc_tol) / (2.0 * az);
    log_lo = std::log(t_star);
    if (log_lo >= log_T) return {p, std::expm1(2.0 * T * az)};
    bound = std::expm1(2.0 * t_star * az);
  }
  std::vector<Segment> segs;
  try {
    segs = H.segments(log_lo, log_T);
  } catch (const NumericError& e) {
    throw NumericError("propagate_point: truncation tolerance unreachable within the materialization cap",
                       std::expm1(2.0 * e.achieved_bound() * std::abs(z)));
  }
  ExtendedPoint q = p;
  for (auto it = segs.rbegin(); it != segs.rend(); ++it) {
    q = mobius_apply(kernel(it->h, log_interval_length(it->log_left, it->log_right), z).entries, q);
  }
  return {q, bound};
}

/// Largest entrywise difference after scaling both matrices so that the
/// largest entry of `a` becomes 1 (the same entry of `b` is used for `b`).
inline double projective_difference(const Mat2& a, const Mat2& b) {
  const complex ea[4] = {a.a, a.b, a.c, a.d};
  const complex eb[4] = {b.a, b.b, b.c, b.d};
  int k = 0;
  for (int i = 1; i < 4; ++i) {
    if (std::abs(ea[i]) > std::abs(ea[k])) k = i;
  }
  if (ea[k] == complex{} || eb[k] == complex{}) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) worst = std::max(worst, std::abs(ea[i] / ea[k] - eb[i] / eb[k]));
  return worst;
}

/// Coefficients W_l(H; T), l = 0, ..., terms - 1, of W(H; T, z) = Σ W_l z^l,
/// from W_0 = I and W_{l+1}(t) = -∫_0^t W_l(s) H(s) J ds, carried exactly as
/// polynomials in t on each constant piece.
inline std::vector<Mat2> picard_coefficients(const PiecewiseHamiltonian& H, double T, int terms,
                                             double log_depth = -45.0) {
  if (terms < 1) throw DomainError("picard: terms must be at least 1");
  if (!(T > 0.0)) throw DomainError("picard: T must be positive");
  const double log_T = std::log(T);
  const double lo = H.has_staircase() ? log_T + log_depth : kNegInf;
  const auto L = static_cast<std::size_t>(terms);
  std::vector<Mat2> value(L, Mat2{complex{0.0}, complex{0.0}, complex{0.0}, complex{0.0}});
  value[0] = Mat2::identity();
  // poly[l][j]: coefficient of u^j of W_l(a + u) on the current piece
  std::vector<std::vector<Mat2>> poly(L);
  for (const auto& s : H.segments(lo, log_T)) {
    const double len = log_interval_length(s.log_left, s.log_right);
    const Mat2 m = detail::hj(s.h);
    for (std::size_t l = 0; l < L; ++l) {
      auto& p = poly[l];
      p.assign(l + 1, Mat2{});
      p[0] = value[l];
      if (l > 0) {
        for (std::size_t j = 0; j < l; ++j) {
          p[j + 1] = complex{-1.0 / static_cast<double>(j + 1)} * (poly[l - 1][j] * m);
        }
      }
    }
    for (std::size_t l = 0; l < L; ++l) {
      // Horner in u = len
      Mat2 acc = poly[l][l];
      for (std::size_t j = l; j-- > 0;) acc = complex{len} * acc + poly[l][j];
      value[l] = acc;
    }
  }
  return value;
}

/// Σ_{l >= L} x^l / l! for x >= 0, bounded by a geometric tail.
inline double exp_series_tail(double x, int L) {
  double term = 1.0;
  for (int l = 1; l <= L; ++l) term *= x / l;
  const double q = x / (L + 1);
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  return term / (1.0 - q);
}

struct PicardResult {
  TransferMatrix transfer;
  double remainder_bound;
};

/// Truncated power series Σ_{l < terms} W_l(H; T) z^l with the remainder
/// bound Σ_{l >= terms} (2T|z|)^l / l!. Throws NumericError if the bound
/// exceeds `tol`.
inline PicardResult picard_series(const PiecewiseHamiltonian& H, double T, complex z, int terms,
                                  double tol = std::numeric_limits<double>::infinity()) {
  const auto coeff = picard_coefficients(H, T, terms);
  Mat2 acc = coeff.back();
  for (std::size_t l = coeff.size() - 1; l-- > 0;) acc = z * acc + coeff[l];
  const double x = 2.0 * T * std::abs(z);
  double bound = exp_series_tail(x, terms);
  if (H.has_staircase()) bound += std::expm1(2.0 * T * std::exp(-45.0) * std::abs(z)) * std::exp(x);
  if (bound > tol) throw NumericError("picard_series: remainder bound above tolerance", bound);
  return {TransferMatrix::from_matrix(acc), bound};
}

}  // namespace cansys
