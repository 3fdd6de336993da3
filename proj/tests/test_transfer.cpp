#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cansys/random.hpp"
#include "cansys/transfer.hpp"

using namespace cansys;

namespace {

const HMatrix kTheta0{0.0, 1.0, 0.0};
const HMatrix kThetaInf{1.0, 0.0, 0.0};
const HMatrix kHalf{0.5, 0.5, 0.0};

Mat2 mat(complex a, complex b, complex c, complex d) { return {a, b, c, d}; }

double max_diff(const Mat2& a, const Mat2& b) { return (a - b).max_abs(); }

// Classical RK4 on W' = -z W H J, piece by piece.
Mat2 rk4_solution(const PiecewiseHamiltonian& H, double T, complex z, int steps_per_unit = 4000) {
  Mat2 w = Mat2::identity();
  for (const auto& s : H.segments(kNegInf, std::log(T))) {
    const double len = log_interval_length(s.log_left, s.log_right);
    const Mat2 m = complex{-1.0} * z *
                   Mat2{complex{s.h.h3}, complex{-s.h.h1}, complex{s.h.h2}, complex{-s.h.h3}};
    const int n = std::max(8, static_cast<int>(len * steps_per_unit));
    const complex h{len / n};
    for (int k = 0; k < n; ++k) {
      const Mat2 k1 = w * m;
      const Mat2 k2 = (w + complex{0.5} * h * k1) * m;
      const Mat2 k3 = (w + complex{0.5} * h * k2) * m;
      const Mat2 k4 = (w + h * k3) * m;
      w = w + (h / 6.0) * (k1 + complex{2.0} * k2 + complex{2.0} * k3 + k4);
    }
  }
  return w;
}

}  // namespace

TEST(PieceTransfer, WorkedExamples) {
  rnd::Rng rng(31);
  for (int k = 0; k < 100; ++k) {
    const complex z = rnd::spectral_point(rng, 0.0, 5.0);
    const double l = rnd::uniform(rng, 0.01, 3.0);
    const complex x = z * l;
    EXPECT_LT(max_diff(piece_transfer(kThetaInf, l, z).matrix(), mat(1.0, x, 0.0, 1.0)), 1e-14);
    EXPECT_LT(max_diff(piece_transfer(kTheta0, l, z).matrix(), mat(1.0, 0.0, -x, 1.0)), 1e-14);
    const complex c = std::cos(x / 2.0);
    const complex s = std::sin(x / 2.0);
    EXPECT_LT(max_diff(piece_transfer(kHalf, l, z).matrix(), mat(c, s, -s, c)), 1e-13);
    // the rotation form fixes i
    EXPECT_LT(chordal_distance(mobius_apply(piece_transfer(kHalf, l, z).entries, ExtendedPoint(0, 1)),
                               ExtendedPoint(0, 1)),
              1e-13);
  }
}

TEST(PieceTransfer, AgreesWithRungeKutta) {
  rnd::Rng rng(32);
  for (int k = 0; k < 60; ++k) {
    const HMatrix h = rnd::hmatrix(rng);
    const complex z = rnd::spectral_point(rng, 0.0, 5.0);
    const double l = rnd::uniform(rng, 0.01, 2.0);
    const auto H = PiecewiseHamiltonian::constant(h);
    EXPECT_LT(max_diff(piece_transfer(h, l, z).matrix(), rk4_solution(H, l, z)), 1e-9);
  }
}

TEST(PieceTransfer, SmallDeterminantBranchIsContinuous) {
  // det(H) from 1e-30 to 1e-2 crosses the sin(x)/x series guard
  for (double e : {1e-30, 1e-20, 1e-12, 1e-9, 1e-8, 1e-6, 1e-4, 1e-2}) {
    const HMatrix h{0.5 + std::sqrt(0.25 - e), 0.5 - std::sqrt(0.25 - e), 0.0};
    const complex z{1.3, 0.7};
    const Mat2 w = piece_transfer(h, 1.7, z).matrix();
    const Mat2 series = Mat2::identity() - complex{1.7} * z * Mat2{complex{0.0}, complex{-h.h1}, complex{h.h2}, complex{0.0}};
    // the d = 0 formula differs by O(d |zℓ|^2)
    EXPECT_LT(max_diff(w, series), 10.0 * e + 1e-15) << "det " << e;
  }
}

TEST(PieceTransfer, HugeArgumentsStayFinite) {
  const auto w = piece_transfer(kHalf, 1e8, complex{3.0, 2.0});
  EXPECT_TRUE(std::isfinite(w.log_scale));
  EXPECT_GT(w.log_scale, 1e7);
  EXPECT_LE(w.entries.max_abs(), 1.0);
  EXPECT_GE(w.entries.max_abs(), 0.5);
  // |Im(z)| ℓ / 2 is the growth rate of cos and sin
  EXPECT_NEAR(w.log_scale, 1e8, 1.0);
}

TEST(FundamentalSolution, Examples) {
  rnd::Rng rng(33);
  for (int k = 0; k < 50; ++k) {
    const complex z = rnd::spectral_point(rng, 0.0, 5.0);
    const auto a = PiecewiseHamiltonian::constant(kThetaInf);
    EXPECT_LT(max_diff(fundamental_solution(a, 1.0, z).transfer.matrix(), mat(1.0, z, 0.0, 1.0)), 1e-14);
    const auto two = PiecewiseHamiltonian({{kNegInf, 0.0, kThetaInf}}, kTheta0);
    const Mat2 expected = mat(1.0, z, 0.0, 1.0) * mat(1.0, 0.0, -z, 1.0);
    const auto w = fundamental_solution(two, 2.0, z);
    EXPECT_LT(max_diff(w.transfer.matrix(), expected), 1e-13);
    EXPECT_EQ(w.truncation_bound, 0.0);
    EXPECT_LT(max_diff(picard_series(two, 2.0, z, 40).transfer.matrix(), expected), 1e-10);
    const auto r = rnd::hamiltonian(rng);
    EXPECT_EQ(max_diff(fundamental_solution(r, 3.0, 0.0).transfer.matrix(), Mat2::identity()), 0.0);
  }
  EXPECT_THROW(fundamental_solution(PiecewiseHamiltonian(), 0.0, 1.0), DomainError);
  EXPECT_THROW(fundamental_solution(PiecewiseHamiltonian(), 1.0, 1.0, 0.0), DomainError);
}

TEST(FundamentalSolution, AgreesWithRungeKuttaOnRandomHamiltonians) {
  rnd::Rng rng(34);
  for (int k = 0; k < 30; ++k) {
    const auto H = rnd::piecewise(rng, 5);
    const complex z = rnd::spectral_point(rng, 0.0, 4.0);
    const double T = rnd::uniform(rng, 0.1, 3.0);
    EXPECT_LT(projective_difference(fundamental_solution(H, T, z).transfer.matrix(), rk4_solution(H, T, z)), 1e-8);
  }
}

TEST(FundamentalSolution, DeterminantIsOne) {
  rnd::Rng rng(35);
  for (int k = 0; k < 200; ++k) {
    const auto H = rnd::hamiltonian(rng);
    const complex z = rnd::spectral_point(rng, 0.0, 50.0);
    const double T = std::exp(rnd::uniform(rng, -2.0, 4.0));
    const auto w = fundamental_solution(H, T, z).transfer;
    // det(entries) e^{2 log_scale} = 1 up to the rounding floor eps ||W||^2
    EXPECT_LE(std::abs(w.det() - 1.0), determinant_tolerance(w)) << w.log_scale;
  }
  // a thousand pieces
  const auto osc = make_alternating(1000, kThetaInf, {0.3, 0.7, 0.2}, 1.0, kHalf);
  const auto w = fundamental_solution(osc, 1.0, complex{3.0, 1.0}).transfer;
  EXPECT_LT(std::abs(w.det() - 1.0), 1e-9);
}

TEST(FundamentalSolution, Multiplicativity) {
  rnd::Rng rng(36);
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::piecewise(rng, 5);
    const complex z = rnd::spectral_point(rng, 0.0, 5.0);
    const double t1 = rnd::uniform(rng, 0.05, 1.5);
    const double t2 = t1 + rnd::uniform(rng, 0.05, 1.5);
    const Mat2 whole = fundamental_solution(H, t2, z).transfer.matrix();
    const Mat2 split = fundamental_solution(H, t1, z).transfer.matrix() * transfer_between(H, t1, t2, z).matrix();
    EXPECT_LT(projective_difference(whole, split), 1e-10);
  }
}

TEST(FundamentalSolution, RescalingOfSolutions) {
  rnd::Rng rng(37);
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::hamiltonian(rng);
    const double r = std::exp(rnd::uniform(rng, -3.0, 3.0));
    const double t = std::exp(rnd::uniform(rng, -1.0, 1.5));
    const complex z = rnd::spectral_point(rng, 0.0, 3.0);
    const auto a = fundamental_solution(rescale(H, r), t, z, 1e-14).transfer.matrix();
    const auto b = fundamental_solution(H, t / r, r * z, 1e-14).transfer.matrix();
    EXPECT_LT(projective_difference(a, b), 1e-9);
  }
}

TEST(FundamentalSolution, StaircaseTruncationBound) {
  rnd::Rng rng(38);
  const auto H = rnd::staircase(rng, false);
  const complex z{2.0, 1.0};
  const auto w = fundamental_solution(H, 1.0, z, 1e-8);
  EXPECT_GT(w.truncation_bound, 0.0);
  EXPECT_LE(w.truncation_bound, 1e-8 * (1 + 1e-12));
  const auto fine = fundamental_solution(H, 1.0, z, 1e-15);
  EXPECT_LT(projective_difference(fine.transfer.matrix(), w.transfer.matrix()), 2e-8);

  auto spec = rnd::staircase_spec(rng);
  spec.max_pieces = 3;
  const auto capped = PiecewiseHamiltonian::with_staircase({}, kTheta0, spec);
  try {
    fundamental_solution(capped, 1.0, z, 1e-300);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_GT(e.achieved_bound(), 1e-300);
  }
}

TEST(Picard, CoefficientsOfSimpleHamiltonians) {
  const auto one = picard_series(PiecewiseHamiltonian::constant(kHalf), 2.0, complex{1.0, 1.0}, 1);
  EXPECT_EQ(max_diff(one.transfer.matrix(), Mat2::identity()), 0.0);
  const auto c = picard_coefficients(PiecewiseHamiltonian::constant(kThetaInf), 1.0, 6);
  EXPECT_LT(max_diff(c[1], mat(0.0, 1.0, 0.0, 0.0)), 1e-16);  // -Θ(∞) J
  for (int l = 2; l < 6; ++l) EXPECT_EQ(c[static_cast<std::size_t>(l)].max_abs(), 0.0);
}

TEST(Picard, AgreesWithClosedFormProducts) {
  rnd::Rng rng(39);
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::piecewise(rng, 3);
    const complex z = std::polar(2.0, rnd::uniform(rng, 0.0, std::numbers::pi));
    const auto p = picard_series(H, 1.0, z, 30);
    EXPECT_LT(p.remainder_bound, 1e-10);
    EXPECT_LT(projective_difference(p.transfer.matrix(), fundamental_solution(H, 1.0, z).transfer.matrix()), 1e-10);
  }
  EXPECT_THROW(picard_series(PiecewiseHamiltonian::constant(kHalf), 1.0, 5.0, 10, 1e-6), NumericError);
}

TEST(Picard, CoefficientBound) {
  rnd::Rng rng(40);
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::hamiltonian(rng);
    const double t = std::exp(rnd::uniform(rng, -2.0, 1.5));
    const auto c = picard_coefficients(H, t, 25);
    double bound = 1.0;
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (l > 0) bound *= 2.0 * t / static_cast<double>(l);
      // induced norm for all l; the entrywise norm (larger) also obeys it for l >= 1
      EXPECT_LE(c[l].induced_l1_norm(), bound + 1e-12) << "l = " << l << ", t = " << t;
      if (l > 0) {
        EXPECT_LE(c[l].l1_norm(), bound + 1e-12) << "l = " << l << ", t = " << t;
      }
    }
  }
}

TEST(WeakContinuity, OscillatingTransfersConverge) {
  const auto limit = PiecewiseHamiltonian::constant(kHalf);
  for (complex z : {complex{2.0, 0.0}, complex{0.0, 2.0}, complex{1.2, 1.6}, complex{-1.0, 0.5}}) {
    const Mat2 target = fundamental_solution(limit, 1.0, z).transfer.matrix();
    double prev = 1e9;
    for (int n : {8, 16, 32, 64, 128, 256}) {
      const auto h = make_alternating(n, kThetaInf, kTheta0, 1.0, kTheta0);
      const double err = max_diff(fundamental_solution(h, 1.0, z).transfer.matrix(), target);
      EXPECT_LE(err, prev + 1e-12) << "n = " << n;
      prev = err;
    }
    EXPECT_LT(prev, 1e-2);
  }
}
