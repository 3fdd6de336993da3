#pragma once

// Weyl disks Ω_{T,z}(H), the Weyl coefficient q_H, exact evaluation when the
// tail is a boundary constant, evaluation along rescaled Hamiltonians,
// atomic Herglotz functions and the Cayley-transformed (Schur) form.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cansys/error.hpp"
#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"
#include "cansys/transfer.hpp"

namespace cansys {

/// Image of the closed upper half-plane under the fractional linear map of a
/// transfer matrix E = (a, b; c, d). It is the set of w with
///   kappa |w|^2 - Im(gamma w) + beta <= 0,
/// kappa = Im(conj(c) d), gamma = d conj(a) - conj(b) c, beta = Im(b conj(a)),
/// all taken from the normalized entries.
struct WeylDisk {
  /// Center and radius of the boundary circle. For kappa > 0 the region is
  /// the closed disk, for kappa < 0 the closed exterior (with ∞). For
  /// kappa == 0 it is a half-plane and radius is +inf.
  complex center{0.0};
  double radius = 0.0;
  double chordal_diameter = 0.0;
  bool contains_infinity = false;

  double kappa = 0.0;
  complex gamma{0.0};
  double beta = 0.0;

  /// Membership with a relative slack on the defining inequality.
  bool contains(const ExtendedPoint& p, double slack = 1e-12) const {
    if (p.is_infinite()) return kappa <= 0.0;
    const complex w = p.value();
    const double scale = std::abs(kappa) * std::norm(w) + std::abs(gamma) * std::abs(w) + std::abs(beta);
    return kappa * std::norm(w) - (gamma * w).imag() + beta <= slack * std::max(scale, 1e-300);
  }
};

namespace detail {

// Chordal diameter of the closed Euclidean disk |w - m| <= R.
inline double euclidean_disk_diameter(complex m, double R) {
  const double mm = std::abs(m);
  const double p1 = mm + R;
  const double p2 = std::abs(mm - R);
  const double chord = std::min(2.0, 4.0 * R / (std::hypot(1.0, p1) * std::hypot(1.0, p2)));
  if (R < 1.0) return chord;
  // The disk misses ∞, so it is the larger of the two caps cut out by its
  // boundary circle iff the smaller cap contains ∞.
  const auto P1 = sphere_embed(ExtendedPoint(p1, 0.0));
  const auto P2 = sphere_embed(ExtendedPoint(mm - R, 0.0));
  const double cx = 0.5 * (P1[0] + P2[0]);
  const double cz = 0.5 * (P1[2] + P2[2]);
  if (cz > cx * cx + cz * cz) return 2.0;
  return chord;
}

struct DiskForm {
  double kappa;
  complex gamma;
  double beta;
};

inline DiskForm disk_form(const Mat2& e) {
  return {(std::conj(e.c) * e.d).imag(), e.d * std::conj(e.a) - std::conj(e.b) * e.c, (e.b * std::conj(e.a)).imag()};
}

}  // namespace detail

/// Weyl disk of a transfer matrix in closed form. det(true W) = 1 gives
/// det(entries) = e^{-2 log_scale}, used for the radius.
inline WeylDisk weyl_disk_of(const TransferMatrix& w) {
  const Mat2& e = w.entries;
  const double det = std::exp(-2.0 * w.log_scale);
  const auto f = detail::disk_form(e);
  WeylDisk out;
  out.kappa = f.kappa;
  out.gamma = f.gamma;
  out.beta = f.beta;
  out.contains_infinity = f.kappa <= 0.0;
  if (f.kappa == 0.0) {
    out.radius = std::numeric_limits<double>::infinity();
  } else {
    out.center = complex{0.0, 1.0} * std::conj(f.gamma) / (2.0 * f.kappa);
    out.radius = det / (2.0 * std::abs(f.kappa));
  }
  if (f.kappa > 0.0) {
    out.chordal_diameter = detail::euclidean_disk_diameter(out.center, out.radius);
    return out;
  }
  // J is a rotation of the sphere; J E = (-c, -d; a, b).
  const Mat2 je{-e.c, -e.d, e.a, e.b};
  const auto g = detail::disk_form(je);
  if (g.kappa > 0.0) {
    const complex m = complex{0.0, 1.0} * std::conj(g.gamma) / (2.0 * g.kappa);
    out.chordal_diameter = detail::euclidean_disk_diameter(m, det / (2.0 * g.kappa));
  } else {
    out.chordal_diameter = 2.0;  // holds both 0 and ∞
  }
  return out;
}

/// Ω_{T,z}(H). Staircase parts below the truncation depth are dropped with
/// relative error trunc_tol.
inline WeylDisk weyl_disk(const PiecewiseHamiltonian& H, double T, complex z, double trunc_tol = 1e-12) {
  if (!(z.imag() > 0.0)) throw DomainError("weyl_disk: Im z must be positive");
  return weyl_disk_of(fundamental_solution(H, T, z, trunc_tol).transfer);
}

/// Above this |z| the Weyl coefficient is evaluated on the rescaled
/// Hamiltonian at z / |z|.
inline constexpr double kRescaleThreshold = 1e4;

/// Chordal displacement bound 2ε/(1-ε) of a map W(H; t_*, z) with
/// ||W - I|| <= ε; points move by the angle between lines in C^2.
inline double truncation_displacement(double eps) { return eps < 1.0 ? 2.0 * eps / (1.0 - eps) : 2.0; }

/// q_H(z) = M(W(H; T_tail, z), ξ) for a tail Θ(ξ) with ξ on the extended real
/// line. Throws DomainError if the tail has positive determinant.
inline ExtendedPoint weyl_exact(const PiecewiseHamiltonian& H, complex z, double trunc_tol = 1e-12) {
  if (!(H.tail().det() <= kHamiltonianTol)) throw DomainError("weyl_exact: tail determinant is positive");
  if (!(z.imag() > 0.0)) throw DomainError("weyl_exact: Im z must be positive");
  const ExtendedPoint xi = theta_inv(H.tail());
  const double lts = H.log_tail_start();
  if (lts == kNegInf) return xi;
  return clamp_to_closed_upper(propagate_point(H, std::exp(lts), z, xi, trunc_tol).value);
}

/// Disk route only: a point of Ω_{T,z} for the first T = 16/(tol Im z) · 4^k
/// whose computed chordal diameter is at most tol/2, with truncation at
/// tol/16. The point is M(W, i), propagated piece by piece.
inline ExtendedPoint weyl_coefficient_disk(const PiecewiseHamiltonian& H, complex z, double tol) {
  if (!(z.imag() > 0.0)) throw DomainError("weyl_coefficient: Im z must be positive");
  if (!(tol > 0.0)) throw DomainError("weyl_coefficient: tol must be positive");
  double T = 16.0 / (tol * z.imag());
  double diam = 2.0;
  for (int k = 0; k < 8; ++k, T *= 4.0) {
    diam = weyl_disk(H, T, z, tol / 16.0).chordal_diameter;
    if (diam <= 0.5 * tol) {
      return clamp_to_closed_upper(propagate_point(H, T, z, ExtendedPoint(0.0, 1.0), tol / 16.0).value, tol);
    }
  }
  throw NumericError("weyl_coefficient: Weyl disk did not shrink below tol/2", diam);
}

/// q_H(z) to chordal accuracy tol.
///
/// Large |z| is moved to |z| = 1 by rescaling. A boundary-constant tail that
/// starts before the disk horizon is evaluated exactly; otherwise see
/// weyl_coefficient_disk.
inline ExtendedPoint weyl_coefficient(const PiecewiseHamiltonian& H, complex z, double tol) {
  if (!(z.imag() > 0.0)) throw DomainError("weyl_coefficient: Im z must be positive");
  if (!(tol > 0.0)) throw DomainError("weyl_coefficient: tol must be positive");
  const double az = std::abs(z);
  if (az > kRescaleThreshold) return weyl_coefficient(H.rescaled_log(std::log(az)), z / az, tol);
  const double log_T = std::log(16.0 / (tol * z.imag()));
  if (H.tail().det() <= kHamiltonianTol && H.log_tail_start() <= log_T) {
    return weyl_exact(H, z, tol / 16.0);
  }
  return weyl_coefficient_disk(H, z, tol);
}

/// q_H(r w) computed as q_{A_r H}(w), with r = e^log_r.
inline ExtendedPoint weyl_at_log_scale(const PiecewiseHamiltonian& H, double log_r, complex w, double tol) {
  if (!(w.imag() > 0.0) || std::abs(std::abs(w) - 1.0) > 1e-9) {
    throw DomainError("weyl_at_scale: w must lie on the open upper unit semicircle");
  }
  return weyl_coefficient(H.rescaled_log(log_r), w, tol);
}

inline ExtendedPoint weyl_at_scale(const PiecewiseHamiltonian& H, double r, complex w, double tol) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("weyl_at_scale: r must be positive and finite");
  return weyl_at_log_scale(H, std::log(r), w, tol);
}

struct Atom {
  double x;
  double mass;
};

/// q(z) = a + b z + Σ m_k (1/(x_k - z) - x_k/(1 + x_k^2)).
struct HerglotzData {
  double a = 0.0;
  double b = 0.0;
  std::vector<Atom> atoms;

  void validate() const {
    if (!std::isfinite(a) || !(b >= 0.0) || !std::isfinite(b)) throw DomainError("herglotz: need real a and b >= 0");
    for (const auto& at : atoms) {
      if (!std::isfinite(at.x) || !(at.mass > 0.0) || !std::isfinite(at.mass)) {
        throw DomainError("herglotz: atoms need finite position and positive mass");
      }
    }
  }
};

inline complex herglotz_eval(const HerglotzData& q, complex z) {
  q.validate();
  if (!(z.imag() > 0.0)) throw DomainError("herglotz_eval: Im z must be positive");
  complex s = q.a + q.b * z;
  for (const auto& at : q.atoms) s += at.mass * (1.0 / (at.x - z) - at.x / (1.0 + at.x * at.x));
  // each term has Im >= 0; guard the sum against cancellation in the real part only
  return {s.real(), std::max(0.0, s.imag())};
}

/// β(w) = (w - i)/(w + i), mapping the closed upper half-plane to the closed disk.
inline complex cayley(const ExtendedPoint& w) {
  if (w.is_infinite()) return 1.0;
  const complex i{0.0, 1.0};
  return (w.value() - i) / (w.value() + i);
}

/// β^{-1}(u) = i (1 + u)/(1 - u).
inline complex cayley_inv(complex u) { return complex{0.0, 1.0} * (1.0 + u) / (1.0 - u); }

/// B(u) = β(q_H(β^{-1}(u))) for |u| < 1 and a boundary-constant tail.
inline complex blaschke_eval(const PiecewiseHamiltonian& H, complex u, double trunc_tol = 1e-12) {
  if (!(std::abs(u) < 1.0)) throw DomainError("blaschke_eval: need |u| < 1");
  const complex z = cayley_inv(u);
  if (!(z.imag() > 0.0)) throw DomainError("blaschke_eval: preimage is not in the open upper half-plane");
  return cayley(weyl_exact(H, z, trunc_tol));
}

}  // namespace cansys
