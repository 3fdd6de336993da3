#pragma once

// Randomized property suites behind `cansys verify`. Each suite draws its
// instances from its own generator seeded by (seed, suite index), so a
// failing case is replayed from the seed, suite name and case number.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cansys/cluster.hpp"
#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"
#include "cansys/io.hpp"
#include "cansys/random.hpp"
#include "cansys/transfer.hpp"
#include "cansys/weyl.hpp"

namespace cansys::verify {

using json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 20240517;

/// Same as piece_transfer but with the sign of z flipped: a mutant used to
/// check that the suites can fail.
inline TransferMatrix sign_flipped_piece_transfer(const HMatrix& h, double length, complex z) {
  return piece_transfer(h, length, -z);
}

struct Options {
  std::uint64_t seed = kDefaultSeed;
  PieceKernel kernel = &piece_transfer;
  /// Restricts the run to one suite when nonempty.
  std::string only;
};

struct SuiteResult {
  std::string name;
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::optional<json> first_failure;
};

struct Report {
  std::uint64_t seed = kDefaultSeed;
  std::vector<SuiteResult> suites;

  bool all_passed() const {
    for (const auto& s : suites) {
      if (s.failures) return false;
    }
    return true;
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& s : suites) {
      json j{{"name", s.name}, {"cases", s.cases}, {"failures", s.failures}, {"passed", s.failures == 0}};
      if (s.first_failure) j["first_failure"] = *s.first_failure;
      arr.push_back(j);
    }
    return {{"seed", seed}, {"suites", arr}, {"passed", all_passed()}};
  }
};

namespace detail {

// Serializable description of a random Hamiltonian; random staircases have
// no JSON form and are identified by the replay coordinates only.
inline json describe(const PiecewiseHamiltonian& H) {
  if (H.has_staircase() && !H.staircase_spec()->provenance) {
    json pieces = json::array();
    for (const auto& p : H.pieces()) {
      pieces.push_back({{"log_left", io::detail::log_bound(p.log_left)}, {"log_right", p.log_right}, {"h", io::to_json(p.h)}});
    }
    return {{"pieces", pieces}, {"tail", io::to_json(H.tail())}, {"staircase", "generated"}};
  }
  return io::to_json(H);
}

inline json cplx(complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

class Suite {
 public:
  Suite(std::string name, std::uint64_t seed, std::size_t index)
      : result_{std::move(name), 0, 0, std::nullopt}, rng_(seed * 1000003ULL + index), seed_(seed) {}

  rnd::Rng& rng() { return rng_; }

  /// Records one case; `instance` is only built for the first failure.
  void check(bool ok, const std::function<json()>& instance) {
    const std::size_t k = result_.cases++;
    if (ok) return;
    if (result_.failures++ == 0) {
      result_.first_failure = json{{"case", k}, {"replay", {{"seed", seed_}, {"suite", result_.name}, {"case", k}}},
                                   {"instance", instance()}};
    }
  }

  /// Exceptions count as failures of the case that raised them.
  template <class F>
  void run_case(F&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      check(false, [&] { return json{{"exception", e.what()}}; });
    }
  }

  SuiteResult take() { return std::move(result_); }

 private:
  SuiteResult result_;
  rnd::Rng rng_;
  std::uint64_t seed_;
};

}  // namespace detail

inline void suite_theta_round_trip(detail::Suite& s, const Options&) {
  for (int k = 0; k < 2000; ++k) {
    const ExtendedPoint p = rnd::point(s.rng());
    s.run_case([&] {
      const HMatrix h = theta(p);
      const ExtendedPoint back = theta_inv(h);
      const double err = chordal_distance(back, p);
      s.check(h.is_valid() && err <= 1e-12, [&] { return json{{"point", io::to_json(p)}, {"chordal_error", err}}; });
    });
  }
}

inline void suite_determinant(detail::Suite& s, const Options& o) {
  for (int k = 0; k < 300; ++k) {
    const auto H = rnd::hamiltonian(s.rng());
    const double T = std::exp(rnd::uniform(s.rng(), -3.0, 3.0));
    const complex z = rnd::spectral_point(s.rng(), 0.01, 20.0);
    s.run_case([&] {
      const auto w = fundamental_solution(H, T, z, 1e-12, o.kernel).transfer;
      const double err = std::abs(w.det() - 1.0);
      const double tol = determinant_tolerance(w);
      s.check(err <= tol, [&] {
        return json{{"H", detail::describe(H)}, {"T", T}, {"z", detail::cplx(z)}, {"det_error", err}, {"tolerance", tol}};
      });
    });
  }
}

inline void suite_picard_oracle(detail::Suite& s, const Options& o) {
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::piecewise(s.rng(), 5, -3.0, 0.0);
    const complex z = rnd::spectral_point(s.rng(), 0.0, 5.0);
    s.run_case([&] {
      const auto a = fundamental_solution(H, 1.0, z, 1e-12, o.kernel).transfer;
      const auto b = picard_series(H, 1.0, z, 60).transfer;
      const double diff = projective_difference(a.matrix(), b.matrix());
      s.check(diff <= 1e-10, [&] { return json{{"H", detail::describe(H)}, {"z", detail::cplx(z)}, {"difference", diff}}; });
    });
  }
}

inline void suite_coefficient_bound(detail::Suite& s, const Options&) {
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::piecewise(s.rng(), 5, -3.0, 1.0);
    const double T = std::exp(rnd::uniform(s.rng(), -2.0, 1.5));
    s.run_case([&] {
      const auto c = picard_coefficients(H, T, 25);
      double bound = 1.0;
      bool ok = true;
      std::size_t bad = 0;
      for (std::size_t l = 0; l < c.size(); ++l) {
        if (l > 0) bound *= 2.0 * T / static_cast<double>(l);
        if (c[l].induced_l1_norm() > bound * (1.0 + 1e-12) + 1e-300) {
          ok = false;
          bad = l;
          break;
        }
      }
      s.check(ok, [&] { return json{{"H", detail::describe(H)}, {"T", T}, {"l", bad}}; });
    });
  }
}

inline void suite_disk_nesting(detail::Suite& s, const Options& o) {
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::hamiltonian(s.rng());
    const complex z = rnd::spectral_point(s.rng(), 0.1, 5.0);
    const double T0 = std::exp(rnd::uniform(s.rng(), -3.0, 0.0));
    s.run_case([&] {
      double T = T0;
      auto outer = weyl_disk_of(fundamental_solution(H, T, z, 1e-14, o.kernel).transfer);
      bool ok = true;
      for (int j = 0; j < 6 && ok; ++j) {
        T *= 1.8;
        const auto w = fundamental_solution(H, T, z, 1e-14, o.kernel).transfer;
        const auto inner = weyl_disk_of(w);
        for (double x : {-3.0, -0.5, 0.0, 0.7, 2.0}) ok = ok && outer.contains(mobius_apply(w.entries, ExtendedPoint(x)), 1e-9);
        ok = ok && inner.chordal_diameter <= outer.chordal_diameter + 1e-9;
        outer = inner;
      }
      s.check(ok, [&] { return json{{"H", detail::describe(H)}, {"z", detail::cplx(z)}, {"T0", T0}}; });
    });
  }
}

inline void suite_diameter_bound(detail::Suite& s, const Options& o) {
  for (int k = 0; k < 1000; ++k) {
    const auto H = rnd::hamiltonian(s.rng());
    const double T = std::exp(rnd::uniform(s.rng(), -2.0, 3.0));
    const complex z = rnd::spectral_point(s.rng(), 0.1, 5.0);
    s.run_case([&] {
      const double d = weyl_disk_of(fundamental_solution(H, T, z, 1e-12, o.kernel).transfer).chordal_diameter;
      const double bound = 8.0 / (T * z.imag());
      s.check(d <= bound + 1e-9, [&] {
        return json{{"H", detail::describe(H)}, {"T", T}, {"z", detail::cplx(z)}, {"diameter", d}, {"bound", bound}};
      });
    });
  }
}

inline void suite_group_laws(detail::Suite& s, const Options&) {
  for (int k = 0; k < 200; ++k) {
    const auto H = rnd::hamiltonian(s.rng());
    const double a = rnd::uniform(s.rng(), -5.0, 5.0);
    const double b = rnd::uniform(s.rng(), -5.0, 5.0);
    s.run_case([&] {
      const auto ab = rescale_log(rescale_log(H, a), b);
      const auto ba = rescale_log(rescale_log(H, b), a);
      const auto c = rescale_log(H, a + b);
      const bool ok = ab.same_representation(c, 1e-12) && ba.same_representation(c, 1e-12) &&
                      rescale_log(H, 0.0).same_representation(H, 0.0);
      s.check(ok, [&] { return json{{"H", detail::describe(H)}, {"log_r", a}, {"log_s", b}}; });
    });
  }
  for (int k = 0; k < 500; ++k) {
    Mat2 m;
    Mat2 n;
    for (auto* x : {&m.a, &m.b, &m.c, &m.d, &n.a, &n.b, &n.c, &n.d}) {
      *x = {rnd::uniform(s.rng(), -2.0, 2.0), rnd::uniform(s.rng(), -2.0, 2.0)};
    }
    const ExtendedPoint p = rnd::point(s.rng());
    const ExtendedPoint q = rnd::point(s.rng());
    s.run_case([&] {
      const double comp = chordal_distance(mobius_apply(m * n, p), mobius_apply(m, mobius_apply(n, p)));
      const double iso = std::abs(chordal_distance(mobius_apply(kJ, p), mobius_apply(kJ, q)) - chordal_distance(p, q));
      s.check(comp <= 1e-9 && iso <= 1e-12, [&] {
        return json{{"p", io::to_json(p)}, {"q", io::to_json(q)}, {"composition_error", comp}, {"isometry_error", iso}};
      });
    });
  }
}

inline void suite_rescaling_identity(detail::Suite& s, const Options&) {
  const double tol = 1e-6;
  for (int k = 0; k < 100; ++k) {
    const auto H = rnd::hamiltonian(s.rng());
    const double r = std::exp(rnd::uniform(s.rng(), 0.0, std::log(1e3)));
    const complex w = std::polar(1.0, rnd::uniform(s.rng(), 0.05, std::numbers::pi - 0.05));
    s.run_case([&] {
      const double d = chordal_distance(weyl_at_scale(H, r, w, tol), weyl_coefficient(H, r * w, tol));
      s.check(d <= 2.0 * tol, [&] { return json{{"H", detail::describe(H)}, {"r", r}, {"w", detail::cplx(w)}, {"distance", d}}; });
    });
  }
}

inline void suite_tail_l1_bound(detail::Suite& s, const Options&) {
  for (int k = 0; k < 10; ++k) {
    TargetSet t;
    const int m = rnd::uniform_int(s.rng(), 1, 3);
    for (int j = 0; j < m; ++j) t.curve.push_back(rnd::point(s.rng(), 0.05, 0.3));
    s.run_case([&] {
      t.validate();
      const auto H = construct_for_target(t, 3);
      if (!H.has_staircase()) return;
      for (std::size_t n = 1; n <= 10; ++n) {
        const double lo = -H.staircase_log_t(n);
        const double hi = -H.staircase_log_t(n + 1);
        for (int j = 0; j < 4; ++j) {
          const double lr = lo + (hi - lo) * j / 3.0;
          const auto c = verify_tail_l1_bound(H, n, lr);
          s.check(c.ok, [&] {
            return json{{"target", io::to_json(t)}, {"n", n}, {"log_r", lr}, {"lhs", c.lhs}, {"rhs", c.rhs}};
          });
        }
      }
    });
  }
}

inline void suite_weak_continuity(detail::Suite& s, const Options&) {
  const HMatrix half{0.5, 0.5, 0.0};
  const HMatrix t0{0.0, 1.0, 0.0};
  const HMatrix tinf{1.0, 0.0, 0.0};
  for (const HMatrix& tail : {t0, half}) {
    s.run_case([&] {
      const auto limit = PiecewiseHamiltonian({{kNegInf, 0.0, half}}, tail);
      const auto target = weyl_coefficient(limit, complex{0, 1}, 1e-10);
      double prev = 3.0;
      bool ok = true;
      json errs = json::array();
      for (int n : {8, 16, 32, 64, 128}) {
        const double err = chordal_distance(weyl_coefficient(make_alternating(n, tinf, t0, 1.0, tail), complex{0, 1}, 1e-8), target);
        ok = ok && err <= prev + 0.005;
        prev = err;
        errs.push_back(err);
      }
      s.check(ok && prev <= 0.05, [&] { return json{{"tail", io::to_json(tail)}, {"errors", errs}}; });
    });
  }
}

inline void suite_blaschke(detail::Suite& s, const Options&) {
  for (int k = 0; k < 20; ++k) {
    const auto H = rnd::staircase(s.rng());
    for (int j = 0; j < 20; ++j) {
      const complex u = std::polar(std::sqrt(rnd::uniform(s.rng(), 0.0, 1.0)) * 0.999,
                                   rnd::uniform(s.rng(), 0.0, 2.0 * std::numbers::pi));
      s.run_case([&] {
        const double m = std::abs(blaschke_eval(H, u));
        s.check(m <= 1.0 + 1e-9, [&] { return json{{"H", detail::describe(H)}, {"u", detail::cplx(u)}, {"modulus", m}}; });
      });
    }
  }
}

struct SuiteEntry {
  const char* name;
  void (*run)(detail::Suite&, const Options&);
};

inline const std::vector<SuiteEntry>& suites() {
  static const std::vector<SuiteEntry> all = {
      {"theta_round_trip", &suite_theta_round_trip},
      {"determinant", &suite_determinant},
      {"picard_oracle", &suite_picard_oracle},
      {"coefficient_bound", &suite_coefficient_bound},
      {"disk_nesting", &suite_disk_nesting},
      {"diameter_bound", &suite_diameter_bound},
      {"group_laws", &suite_group_laws},
      {"rescaling_identity", &suite_rescaling_identity},
      {"tail_l1_bound", &suite_tail_l1_bound},
      {"weak_continuity", &suite_weak_continuity},
      {"blaschke", &suite_blaschke},
  };
  return all;
}

inline Report run(const Options& o = {}) {
  Report r;
  r.seed = o.seed;
  bool found = o.only.empty();
  for (std::size_t i = 0; i < suites().size(); ++i) {
    const auto& e = suites()[i];
    if (!o.only.empty() && o.only != e.name) continue;
    found = true;
    detail::Suite s(e.name, o.seed, i);
    e.run(s, o);
    r.suites.push_back(s.take());
  }
  if (!found) throw DomainError("verify: unknown suite " + o.only);
  return r;
}

}  // namespace cansys::verify
