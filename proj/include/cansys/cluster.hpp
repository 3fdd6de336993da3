#pragma once

// Target sets, the sweep sequence realizing a prescribed cluster set, ray and
// sector sampling of q_H at i∞, cluster estimation and the tail L¹ check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cansys/error.hpp"
#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"
#include "cansys/weyl.hpp"

namespace cansys {

/// Polyline through `curve`. Consecutive finite vertices are joined by
/// straight segments; an edge to or from ∞ is the ray leaving the finite
/// vertex away from the origin (upward from 0).
struct TargetSet {
  std::vector<ExtendedPoint> curve;

  void validate() const {
    if (curve.empty()) throw DomainError("target: curve is empty");
    for (std::size_t i = 0; i < curve.size(); ++i) {
      if (!curve[i].in_closed_upper()) {
        throw DomainError("target: vertex " + std::to_string(i) + " outside the closed upper half-plane");
      }
      if (i > 0 && chordal_distance(curve[i - 1], curve[i]) == 0.0) {
        throw DomainError("target: vertices " + std::to_string(i - 1) + " and " + std::to_string(i) + " coincide");
      }
    }
  }

  bool is_singleton() const { return curve.size() == 1; }
};

namespace detail {

// a + τ d for τ in [0, tau_max]; tau_max = ∞ reaches ∞. `reversed` walks the
// edge from the far end.
struct Edge {
  complex a;
  complex d;
  bool to_infinity;
  bool reversed;
  double D;
  double beta;
  double length;

  double arclength(double tau) const {
    const double nd = std::abs(d);
    const double hi = std::isinf(tau) ? std::numbers::pi / 2 : std::atan((nd * nd * tau + beta) / D);
    return 2.0 * nd / D * (hi - std::atan(beta / D));
  }

  double tau_at(double s) const {
    const double nd = std::abs(d);
    if (s >= length) return to_infinity ? std::numeric_limits<double>::infinity() : 1.0;
    if (s <= 0.0) return 0.0;
    return (D * std::tan(std::atan(beta / D) + s * D / (2.0 * nd)) - beta) / (nd * nd);
  }

  ExtendedPoint point(double s) const {
    const double tau = tau_at(reversed ? length - s : s);
    if (std::isinf(tau)) return ExtendedPoint::infinity();
    const complex p = a + tau * d;
    return ExtendedPoint(p.real(), std::max(0.0, p.imag()));
  }
};

inline Edge make_edge(complex a, complex d, bool to_infinity, bool reversed) {
  Edge e{a, d, to_infinity, reversed, 0.0, 0.0, 0.0};
  const double nd2 = std::norm(d);
  e.beta = (a * std::conj(d)).real();
  e.D = std::sqrt(std::max(nd2 * (1.0 + std::norm(a)) - e.beta * e.beta, nd2));
  e.length = e.arclength(to_infinity ? std::numeric_limits<double>::infinity() : 1.0);
  return e;
}

inline complex ray_direction(complex a) { return std::abs(a) > 0.0 ? a / std::abs(a) : complex{0.0, 1.0}; }

}  // namespace detail

/// Chordal arclength parametrization of a target polyline.
class Polyline {
 public:
  explicit Polyline(const TargetSet& t) : start_(t.curve.front()) {
    t.validate();
    for (std::size_t i = 0; i + 1 < t.curve.size(); ++i) {
      const auto& p = t.curve[i];
      const auto& q = t.curve[i + 1];
      if (p.is_finite() && q.is_finite()) {
        edges_.push_back(detail::make_edge(p.value(), q.value() - p.value(), false, false));
      } else if (p.is_finite()) {
        edges_.push_back(detail::make_edge(p.value(), detail::ray_direction(p.value()), true, false));
      } else {
        edges_.push_back(detail::make_edge(q.value(), detail::ray_direction(q.value()), true, true));
      }
      cumulative_.push_back(length_ += edges_.back().length);
    }
  }

  double length() const { return length_; }

  ExtendedPoint at(double s) const {
    if (edges_.empty()) return start_;
    s = std::clamp(s, 0.0, length_);
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), s);
    const std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), edges_.size() - 1);
    const double base = k == 0 ? 0.0 : cumulative_[k - 1];
    return edges_[k].point(s - base);
  }

 private:
  ExtendedPoint start_;
  std::vector<detail::Edge> edges_;
  std::vector<double> cumulative_;
  double length_ = 0.0;
};

/// Pass k walks the polyline forward and back in m_k = ceil(L k) equal
/// arclength steps, so it has 2 m_k + 1 points.
class SweepSequence {
 public:
  explicit SweepSequence(const TargetSet& t) : poly_(t) {}

  const Polyline& polyline() const { return poly_; }

  std::size_t steps(std::size_t k) const {
    return static_cast<std::size_t>(std::ceil(poly_.length() * static_cast<double>(k) - 1e-12));
  }
  std::size_t pass_size(std::size_t k) const { return 2 * steps(k) + 1; }

  /// 1-based index of the first point of pass k.
  std::size_t pass_start(std::size_t k) const {
    std::size_t n = 1;
    for (std::size_t j = 1; j < k; ++j) n += pass_size(j);
    return n;
  }

  /// ζ_n for n >= 1.
  ExtendedPoint operator()(std::size_t n) const {
    if (n == 0) throw DomainError("sweep: indices start at 1");
    std::size_t k = 1;
    std::size_t j = n - 1;
    while (j >= pass_size(k)) j -= pass_size(k++);
    const std::size_t m = steps(k);
    if (m == 0) return poly_.at(0.0);
    const std::size_t pos = j <= m ? j : 2 * m - j;
    return poly_.at(poly_.length() * static_cast<double>(pos) / static_cast<double>(m));
  }

 private:
  Polyline poly_;
};

inline std::vector<ExtendedPoint> sweep_sequence(const TargetSet& target, std::size_t n_max) {
  if (n_max < 1) throw DomainError("sweep_sequence: n_max must be at least 1");
  const SweepSequence seq(target);
  const std::size_t count = seq.pass_start(n_max + 1) - 1;
  std::vector<ExtendedPoint> out;
  out.reserve(count);
  for (std::size_t n = 1; n <= count; ++n) out.push_back(seq(n));
  return out;
}

/// Staircase over the sweep of `target` with t_{n+1}/t_n = e^{-n log_ratio_base}
/// and tail Θ(0). The target {0} gives the constant Θ(0). `n_max` is the
/// number of passes recorded as validated; the sequence itself continues.
inline PiecewiseHamiltonian construct_for_target(const TargetSet& target, std::size_t n_max,
                                                 double log_ratio_base = std::log(2.0)) {
  target.validate();
  if (n_max < 1) throw DomainError("construct: n_max must be at least 1");
  if (!(log_ratio_base > 0.0) || !std::isfinite(log_ratio_base)) {
    throw DomainError("construct: log_ratio_base must be positive");
  }
  if (target.is_singleton() && target.curve.front() == ExtendedPoint(0.0)) {
    return PiecewiseHamiltonian::constant(theta(ExtendedPoint(0.0)));
  }
  StaircaseSpec spec;
  spec.zeta = SweepSequence(target);
  spec.log_t = default_log_t(log_ratio_base);
  spec.provenance = StaircaseProvenance{target.curve, n_max, log_ratio_base};
  return make_staircase(std::move(spec));
}

enum class QueryMode { ray, sector };

struct ClusterQuery {
  QueryMode mode = QueryMode::ray;
  double theta = std::numbers::pi / 2;
  double alpha = std::numbers::pi / 4;
  double log_r_min = 0.0;
  double log_r_max = std::log(1e6);
  std::size_t samples = 500;

  void validate() const {
    if (mode == QueryMode::ray && !(theta > 0.0 && theta < std::numbers::pi)) {
      throw DomainError("query: theta must lie in (0, pi)");
    }
    if (mode == QueryMode::sector && !(alpha > 0.0 && alpha <= std::numbers::pi / 2)) {
      throw DomainError("query: alpha must lie in (0, pi/2]");
    }
    if (!(log_r_min >= 0.0) || !std::isfinite(log_r_min)) throw DomainError("query: r_min must be at least 1");
    if (!(log_r_max > log_r_min) || !std::isfinite(log_r_max)) throw DomainError("query: r_max must exceed r_min");
    if (samples < 1) throw DomainError("query: need at least one sample");
  }
};

struct AngleInterval {
  double lo;
  double hi;
};

inline AngleInterval sector_direction_set(const ClusterQuery& q) {
  if (q.mode == QueryMode::ray) return {q.theta, q.theta};
  return {q.alpha, std::numbers::pi - q.alpha};
}

/// Sector samples cycle through this many equally spaced directions,
/// endpoints included.
inline constexpr std::size_t kSectorStrata = 9;

struct Sample {
  double log_r;
  double theta;
  ExtendedPoint q;
  double certified_error;
};

/// q_H(r e^{iθ}) on a log-uniform r grid, evaluated as q_{A_r H}(e^{iθ}).
inline std::vector<Sample> sample_q(const PiecewiseHamiltonian& H, const ClusterQuery& query, double tol,
                                    unsigned threads = 0) {
  query.validate();
  if (!(tol > 0.0)) throw DomainError("sample_q: tol must be positive");
  const std::size_t n = query.samples;
  const AngleInterval dirs = sector_direction_set(query);
  std::vector<Sample> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double log_r = query.log_r_min + f * (query.log_r_max - query.log_r_min);
    double th = dirs.lo;
    if (query.mode == QueryMode::sector && dirs.hi > dirs.lo) {
      th = dirs.lo + (dirs.hi - dirs.lo) * static_cast<double>(i % kSectorStrata) / (kSectorStrata - 1);
    }
    try {
      out[i] = {log_r, th, weyl_at_log_scale(H, log_r, std::polar(1.0, th), tol), tol};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += threads) work(i);
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

/// Greedy thinning: keeps a point only if it is farther than `resolution`
/// from every point kept so far.
inline PointCloud dedup_cloud(const PointCloud& pts, double resolution = 1e-3) {
  PointCloud kept;
  for (const auto& p : pts) {
    if (kept.empty() || chordal_distance_to(p, kept) > resolution) kept.push_back(p);
  }
  return kept;
}

struct ClusterEstimate {
  PointCloud cloud;
  double log_window_lo;
  double log_window_hi;
  std::size_t sweep_cycles_covered = 0;
};

/// Number of whole sweep passes of H's staircase whose plateaus
/// log r ∈ [-log t_n, -log t_{n+1}] fall inside the window.
inline std::size_t sweep_cycles_in_window(const PiecewiseHamiltonian& H, double log_lo, double log_hi) {
  const auto* spec = H.staircase_spec();
  if (!spec || !spec->provenance) return 0;
  const SweepSequence seq(TargetSet{spec->provenance->curve});
  std::size_t covered = 0;
  std::size_t start = 1;
  for (std::size_t k = 1;; ++k) {
    const std::size_t end = start + seq.pass_size(k);  // one past the last index
    const double first = -H.staircase_log_t(start);
    const double last = -H.staircase_log_t(end);
    if (first > log_hi) break;
    if (first >= log_lo && last <= log_hi) ++covered;
    start = end;
  }
  return covered;
}

/// Tail-window cloud: samples whose log r lies in the top `tail_fraction` of
/// the sampled log range, thinned at chordal resolution 1e-3.
inline ClusterEstimate estimate_cluster(const std::vector<Sample>& samples, double tail_fraction,
                                        const PiecewiseHamiltonian* H = nullptr) {
  if (samples.empty()) throw DomainError("estimate_cluster: no samples");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw DomainError("estimate_cluster: tail_fraction must lie in (0, 1]");
  }
  double lo = samples.front().log_r;
  double hi = lo;
  for (const auto& s : samples) {
    lo = std::min(lo, s.log_r);
    hi = std::max(hi, s.log_r);
  }
  const double cut = hi - tail_fraction * (hi - lo);
  PointCloud tail;
  for (const auto& s : samples) {
    if (s.log_r >= cut) tail.push_back(s.q);
  }
  if (tail.empty()) throw NumericError("estimate_cluster: no samples in the tail window", 0.0);
  ClusterEstimate est{dedup_cloud(tail), cut, hi, 0};
  if (H) est.sweep_cycles_covered = sweep_cycles_in_window(*H, cut, hi);
  return est;
}

/// Points along the target polyline at chordal arclength spacing at most
/// `resolution`; a finite edge to ∞ is sampled up to ∞ itself.
inline PointCloud target_cloud(const TargetSet& target, double resolution = 1e-3) {
  if (!(resolution > 0.0)) throw DomainError("target_cloud: resolution must be positive");
  const Polyline poly(target);
  const auto m = static_cast<std::size_t>(std::ceil(poly.length() / resolution));
  PointCloud out;
  for (std::size_t j = 0; j <= m; ++j) {
    out.push_back(poly.at(m == 0 ? 0.0 : poly.length() * static_cast<double>(j) / static_cast<double>(m)));
  }
  return out;
}

struct TailBoundCheck {
  double lhs;
  double rhs;
  double truncation_bound;
  bool ok;
};

/// Compares ∫_0^1 ||A_r H - Θ(ζ_n)|| with 4 t_{n+2}/t_{n+1} + ||Θ(ζ_{n+1}) - Θ(ζ_n)||
/// for r = e^log_r in [1/t_n, 1/t_{n+1}].
inline TailBoundCheck verify_tail_l1_bound(const PiecewiseHamiltonian& H, std::size_t n, double log_r) {
  if (!H.has_staircase()) throw DomainError("verify_tail_l1_bound: Hamiltonian has no staircase");
  if (n < 1) throw DomainError("verify_tail_l1_bound: n must be at least 1");
  const double lt_n = H.staircase_log_t(n);
  const double lt_n1 = H.staircase_log_t(n + 1);
  const double slack = 1e-12 * std::max(1.0, std::abs(lt_n1));
  if (log_r < -lt_n - slack || log_r > -lt_n1 + slack) {
    throw DomainError("verify_tail_l1_bound: r outside [1/t_n, 1/t_{n+1}]");
  }
  const HMatrix zn = theta(H.staircase_zeta(n));
  const auto d = restrict_l1_distance(rescale_log(H, log_r), PiecewiseHamiltonian::constant(zn), 1.0);
  const double rhs = 4.0 * std::exp(H.staircase_log_t(n + 2) - lt_n1) + l1_distance(theta(H.staircase_zeta(n + 1)), zn);
  return {d.value, rhs, d.bound, d.value <= rhs + d.bound};
}

}  // namespace cansys
