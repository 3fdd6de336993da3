#pragma once

// Seeded generators of random points, Hamiltonians and spectral parameters
// for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"

namespace cansys::rnd {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline int uniform_int(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Closed upper half-plane point with log-uniform modulus; includes ∞ and
/// real points with fixed probabilities.
inline ExtendedPoint point(Rng& rng, double p_inf = 0.05, double p_real = 0.1) {
  const double u = uniform(rng, 0.0, 1.0);
  if (u < p_inf) return ExtendedPoint::infinity();
  const double m = std::exp(uniform(rng, -3.0, 3.0));
  if (u < p_inf + p_real) return ExtendedPoint(uniform(rng, 0.0, 1.0) < 0.5 ? -m : m, 0.0);
  const double a = uniform(rng, 0.0, std::numbers::pi);
  return ExtendedPoint(m * std::cos(a), m * std::sin(a));
}

inline HMatrix hmatrix(Rng& rng) { return theta(point(rng, 0.1, 0.2)); }

/// z with arg in [0.05, π - 0.05] and |z| in [lo, hi].
inline complex spectral_point(Rng& rng, double lo, double hi) {
  const double m = uniform(rng, lo, hi);
  const double a = uniform(rng, 0.05, std::numbers::pi - 0.05);
  return std::polar(m, a);
}

/// Up to `max_pieces` explicit pieces with breakpoints in [log_lo, log_hi]
/// and a random tail.
inline PiecewiseHamiltonian piecewise(Rng& rng, int max_pieces = 5, double log_lo = -3.0, double log_hi = 1.0) {
  const int n = uniform_int(rng, 1, max_pieces);
  std::vector<double> cuts;
  for (int k = 0; k < n; ++k) cuts.push_back(uniform(rng, log_lo, log_hi));
  std::sort(cuts.begin(), cuts.end(), std::greater<>());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Piece> pieces;
  // top piece ends at the largest cut, deepest piece reaches down to 0
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) pieces.push_back({cuts[k + 1], cuts[k], hmatrix(rng)});
  pieces.push_back({kNegInf, cuts.back(), hmatrix(rng)});
  return PiecewiseHamiltonian(std::move(pieces), hmatrix(rng));
}

/// ζ_n = ζ_∞ + c/n rotated in the closed half-plane, t_n from the default
/// sequence with a random base.
inline StaircaseSpec staircase_spec(Rng& rng) {
  const ExtendedPoint limit = point(rng, 0.0, 0.2);
  const complex c = std::polar(uniform(rng, 0.0, 2.0), uniform(rng, 0.0, std::numbers::pi));
  const complex base = limit.value();
  StaircaseSpec spec;
  spec.zeta = [base, c](std::size_t n) {
    complex z = base + c / static_cast<double>(n);
    return ExtendedPoint(z.real(), std::max(0.0, z.imag()));
  };
  spec.log_t = default_log_t(uniform(rng, std::log(2.0), std::log(4.0)));
  return spec;
}

/// Staircase Θ(ζ_n) on (t_{n+1}, t_n], optionally below explicit pieces,
/// with a boundary-constant tail.
inline PiecewiseHamiltonian staircase(Rng& rng, bool with_pieces = true) {
  std::vector<Piece> pieces;
  if (with_pieces && uniform(rng, 0.0, 1.0) < 0.5) {
    double top = uniform(rng, 0.5, 1.5);
    const int n = uniform_int(rng, 1, 3);
    for (int k = 0; k < n; ++k) {
      const double bottom = (k + 1 == n) ? 0.0 : top * uniform(rng, 0.2, 0.8);
      pieces.push_back({bottom, top, hmatrix(rng)});
      top = bottom;
    }
  }
  const HMatrix tail = theta(uniform(rng, 0.0, 1.0) < 0.2 ? ExtendedPoint::infinity()
                                                          : ExtendedPoint(uniform(rng, -2.0, 2.0), 0.0));
  return PiecewiseHamiltonian::with_staircase(std::move(pieces), tail, staircase_spec(rng));
}

/// Mixture of piecewise and staircase Hamiltonians.
inline PiecewiseHamiltonian hamiltonian(Rng& rng) {
  if (uniform(rng, 0.0, 1.0) < 0.3) return staircase(rng);
  return piecewise(rng);
}

}  // namespace cansys::rnd
