#pragma once

// Trace-normed Hamiltonians: constant values, the Θ correspondence with the
// closed upper half-plane, piecewise constant functions on (0, ∞) with
// log-domain breakpoints, the lazily generated staircase accumulating at 0,
// rescaling, and L1 / weak-pairing functionals on restrictions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cansys/error.hpp"
#include "cansys/halfplane.hpp"

namespace cansys {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kHamiltonianTol = 1e-12;

/// Real symmetric 2x2 matrix (h1, h3; h3, h2), positive semidefinite, trace 1.
struct HMatrix {
  double h1 = 0.0;
  double h2 = 0.0;
  double h3 = 0.0;

  double det() const { return h1 * h2 - h3 * h3; }

  /// Entry (i, j) with i, j in {0, 1}.
  double entry(int i, int j) const {
    if (i != j) return h3;
    return i == 0 ? h1 : h2;
  }

  bool is_valid(double tol = kHamiltonianTol) const {
    return std::isfinite(h1) && std::isfinite(h2) && std::isfinite(h3) && h1 >= -tol && h2 >= -tol &&
           std::abs(h1 + h2 - 1.0) <= tol && det() >= -tol;
  }

  friend bool operator==(const HMatrix&, const HMatrix&) = default;
};

/// Entrywise l1 norm of the difference, |Δh1| + |Δh2| + 2|Δh3|.
inline double l1_distance(const HMatrix& a, const HMatrix& b) {
  return std::abs(a.h1 - b.h1) + std::abs(a.h2 - b.h2) + 2.0 * std::abs(a.h3 - b.h3);
}

/// The constant Hamiltonian whose Weyl coefficient is identically `p`.
inline HMatrix theta(const ExtendedPoint& p) {
  if (!p.in_closed_upper()) throw DomainError("theta: point below the real axis");
  if (p.is_infinite()) return {1.0, 0.0, 0.0};
  const complex z{p.real(), std::max(0.0, p.imag())};
  const double m = std::abs(z);
  if (m <= 1.0) {
    const double d = 1.0 + m * m;
    return {m * m / d, 1.0 / d, z.real() / d};
  }
  const complex u = 1.0 / z;
  const double mu = std::abs(u);
  const double d = 1.0 + mu * mu;
  return {1.0 / d, mu * mu / d, u.real() / d};
}

/// Inverse of theta on valid matrices; h2 = 0 gives ∞.
inline ExtendedPoint theta_inv(const HMatrix& h) {
  if (!h.is_valid()) throw DomainError("theta_inv: not a trace-normed positive semidefinite matrix");
  double d = h.det();
  // h1 h2 and h3^2 cancel for boundary points; drop the rounding residue
  if (d <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(h.h1 * h.h2, h.h3 * h.h3)) d = 0.0;
  const double s = std::sqrt(d);
  if (h.h2 >= h.h1) return ExtendedPoint(complex{h.h3, s} / h.h2);
  const complex den{h.h3, -s};
  if (den == complex{}) return ExtendedPoint::infinity();
  return ExtendedPoint(h.h1 / den);
}

/// A constant piece on (e^log_left, e^log_right].
struct Piece {
  double log_left;
  double log_right;
  HMatrix h;

  friend bool operator==(const Piece&, const Piece&) = default;
};

/// What a staircase was generated from, kept for serialization.
struct StaircaseProvenance {
  std::vector<ExtendedPoint> curve;
  std::size_t n_max = 0;
  double log_ratio_base = std::log(2.0);
};

/// Generator of the piecewise constant Hamiltonian equal to Θ(ζ_n) on
/// (t_{n+1}, t_n], n >= 1, with t_1 = 1.
struct StaircaseSpec {
  std::function<ExtendedPoint(std::size_t)> zeta;  // n >= 1
  std::function<double(std::size_t)> log_t;        // n >= 1, log_t(1) == 0
  /// Prefix length on which the hypotheses are checked.
  std::size_t check_prefix = 64;
  /// Ratios t_{n+1}/t_n below this must be nonincreasing.
  double ratio_threshold = 0.5;
  /// Hard cap on lazily materialized pieces.
  std::size_t max_pieces = 200000;
  std::optional<StaircaseProvenance> provenance;
};

/// log t_n = -(n (n - 1) / 2) * log_ratio_base, i.e. t_{n+1}/t_n = base^{-n}.
inline std::function<double(std::size_t)> default_log_t(double log_ratio_base = std::log(2.0)) {
  return [log_ratio_base](std::size_t n) {
    const double k = static_cast<double>(n);
    return -0.5 * k * (k - 1.0) * log_ratio_base;
  };
}

/// A constant piece clipped to a query range, in log coordinates.
/// `log_left` is -inf for a piece reaching down to 0.
struct Segment {
  double log_left;
  double log_right;
  HMatrix h;
};

/// Linear length e^b - e^a of the log interval (a, b].
inline double log_interval_length(double a, double b) {
  if (a == kNegInf) return std::exp(b);
  return std::exp(b) * -std::expm1(a - b);
}

namespace detail {

// Shared, lazily extended materialization of a staircase. Copies of a
// Hamiltonian (including rescaled ones) share one cache.
class StaircaseCache {
 public:
  explicit StaircaseCache(StaircaseSpec spec) : spec_(std::move(spec)) {
    log_t_.push_back(spec_.log_t(1));
  }

  const StaircaseSpec& spec() const { return spec_; }

  // Materializes pieces until t_{n+1} <= e^log_lo (unshifted coordinates).
  // Returns false if the piece cap was hit first.
  bool ensure_depth(double log_lo) {
    std::lock_guard lock(mu_);
    return ensure_depth_locked(log_lo);
  }

  std::size_t materialized() const {
    std::lock_guard lock(mu_);
    return mats_.size();
  }

  double deepest_log_t() const {
    std::lock_guard lock(mu_);
    return log_t_.back();
  }

  double log_t(std::size_t n) {
    std::lock_guard lock(mu_);
    ensure_count_locked(n);
    return log_t_[n - 1];
  }

  ExtendedPoint zeta(std::size_t n) {
    std::lock_guard lock(mu_);
    ensure_count_locked(n);
    return zetas_[n - 1];
  }

  // Index n with log_t(n+1) < u <= log_t(n); throws when out of reach.
  std::size_t index_of(double u) {
    std::lock_guard lock(mu_);
    while (!(log_t_.back() < u)) {
      if (mats_.size() >= spec_.max_pieces) {
        throw DomainError("staircase: t below the representable range (deepest index " +
                          std::to_string(mats_.size()) + ")");
      }
      append_locked();
    }
    // log_t_ is strictly decreasing; first k with log_t_[k] < u.
    auto it = std::upper_bound(log_t_.begin(), log_t_.end(), u, std::greater<>());
    // *it < u and *(it - 1) >= u
    return static_cast<std::size_t>(it - log_t_.begin());
  }

  HMatrix matrix(std::size_t n) {
    std::lock_guard lock(mu_);
    ensure_count_locked(n);
    return mats_[n - 1];
  }

  // Pieces meeting (lo, hi] in unshifted coordinates, deepest first.
  // Requires the depth to have been ensured.
  std::vector<Segment> collect(double lo, double hi) const {
    std::lock_guard lock(mu_);
    std::vector<Segment> out;
    for (std::size_t k = mats_.size(); k-- > 0;) {
      const double a = log_t_[k + 1];
      const double b = log_t_[k];
      if (b <= lo) continue;
      if (a >= hi) break;
      out.push_back({std::max(a, lo), std::min(b, hi), mats_[k]});
    }
    return out;
  }

 private:
  bool ensure_depth_locked(double log_lo) {
    while (log_t_.back() > log_lo) {
      if (mats_.size() >= spec_.max_pieces) return false;
      append_locked();
    }
    return true;
  }

  void ensure_count_locked(std::size_t n) {
    if (n > spec_.max_pieces + 1) throw DomainError("staircase: index beyond the materialization cap");
    while (log_t_.size() < n + 1 || mats_.size() < n) append_locked();
  }

  void append_locked() {
    const std::size_t n = mats_.size() + 1;
    const ExtendedPoint z = spec_.zeta(n);
    zetas_.push_back(z);
    mats_.push_back(theta(z));
    log_t_.push_back(spec_.log_t(n + 1));
    if (!(log_t_.back() < log_t_[log_t_.size() - 2])) {
      throw DomainError("staircase: t-sequence is not strictly decreasing at n = " + std::to_string(n));
    }
  }

  StaircaseSpec spec_;
  mutable std::mutex mu_;
  std::vector<double> log_t_;  // log_t_[k] = log t_{k+1}
  std::vector<HMatrix> mats_;  // mats_[k] = Θ(ζ_{k+1})
  std::vector<ExtendedPoint> zetas_;
};

inline bool close_log(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a));
}

}  // namespace detail

/// Piecewise constant trace-normed Hamiltonian on (0, ∞).
///
/// Explicit pieces are stored from the top (adjacent to the tail) down
/// toward 0 and must be contiguous. Below the deepest explicit piece either a
/// staircase generator continues the function, or the deepest matrix is
/// continued down to 0.
class PiecewiseHamiltonian {
 public:
  PiecewiseHamiltonian() : PiecewiseHamiltonian({}, HMatrix{0.0, 1.0, 0.0}) {}

  PiecewiseHamiltonian(std::vector<Piece> pieces, HMatrix tail) : pieces_(std::move(pieces)), tail_(tail) {
    validate();
  }

  static PiecewiseHamiltonian constant(const HMatrix& h) { return PiecewiseHamiltonian({}, h); }

  static PiecewiseHamiltonian with_staircase(std::vector<Piece> pieces, HMatrix tail, StaircaseSpec spec,
                                             double log_shift = 0.0) {
    PiecewiseHamiltonian h;
    h.pieces_ = std::move(pieces);
    h.tail_ = tail;
    h.stair_ = std::make_shared<detail::StaircaseCache>(std::move(spec));
    h.shift_ = log_shift;
    h.validate();
    return h;
  }

  const std::vector<Piece>& pieces() const { return pieces_; }
  const HMatrix& tail() const { return tail_; }
  bool has_staircase() const { return stair_ != nullptr; }
  double staircase_shift() const { return shift_; }
  const StaircaseSpec* staircase_spec() const { return stair_ ? &stair_->spec() : nullptr; }

  /// log of the point where the constant tail begins; -inf when constant.
  double log_tail_start() const {
    if (!pieces_.empty()) return pieces_.front().log_right;
    if (stair_) return staircase_top();
    return kNegInf;
  }

  /// log t_n of the staircase in this Hamiltonian's coordinates.
  double staircase_log_t(std::size_t n) const { return require_stair().log_t(n) + shift_; }
  ExtendedPoint staircase_zeta(std::size_t n) const { return require_stair().zeta(n); }
  std::size_t staircase_materialized() const { return stair_ ? stair_->materialized() : 0; }

  /// Value at t = e^log_t, using the half-open convention (left, right].
  HMatrix eval_log(double log_t) const {
    if (std::isnan(log_t)) throw DomainError("eval: t must be positive");
    if (log_t > log_tail_start()) return tail_;
    for (const auto& p : pieces_) {
      if (log_t > p.log_left) return p.h;
    }
    if (stair_) {
      auto& s = *stair_;
      return s.matrix(s.index_of(log_t - shift_));
    }
    return pieces_.back().h;
  }

  HMatrix eval(double t) const {
    if (!(t > 0.0)) throw DomainError("eval: t must be positive");
    return eval_log(std::log(t));
  }

  /// Constant pieces meeting (e^log_lo, e^log_hi], deepest first, clipped to
  /// the range. log_lo may be -inf only when there is no staircase.
  std::vector<Segment> segments(double log_lo, double log_hi) const {
    std::vector<Segment> top_down;
    if (!(log_lo < log_hi)) return top_down;
    const double ts = log_tail_start();
    if (log_hi > ts) {
      top_down.push_back({std::max(ts, log_lo), log_hi, tail_});
    }
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      double left = p.log_left;
      if (!stair_ && i + 1 == pieces_.size()) left = kNegInf;
      const double a = std::max(left, log_lo);
      const double b = std::min(p.log_right, log_hi);
      if (a < b) top_down.push_back({a, b, p.h});
    }
    std::vector<Segment> out;
    if (stair_ && log_lo < staircase_top()) {
      if (log_lo == kNegInf) throw DomainError("segments: a staircase needs a finite lower cutoff");
      if (!stair_->ensure_depth(log_lo - shift_)) {
        throw NumericError("staircase: materialization cap reached before the requested depth",
                           std::exp(stair_->deepest_log_t() + shift_));
      }
      out = stair_->collect(log_lo - shift_, std::min(log_hi, staircase_top()) - shift_);
      for (auto& s : out) {
        s.log_left += shift_;
        s.log_right += shift_;
      }
    }
    out.insert(out.end(), top_down.rbegin(), top_down.rend());
    return out;
  }

  /// Applies (A_r H)(t) = H(t / r) with log_r = log r.
  PiecewiseHamiltonian rescaled_log(double log_r) const {
    if (!std::isfinite(log_r)) throw DomainError("rescale: r must be positive and finite");
    PiecewiseHamiltonian out = *this;
    for (auto& p : out.pieces_) {
      p.log_left += log_r;
      p.log_right += log_r;
    }
    out.shift_ += log_r;
    return out;
  }

  /// Exact comparison of the representations (explicit data and staircase
  /// identity with shift).
  bool same_representation(const PiecewiseHamiltonian& o, double log_tol = 0.0) const {
    if (tail_ != o.tail_ || pieces_.size() != o.pieces_.size() || stair_ != o.stair_) return false;
    if (std::abs(shift_ - o.shift_) > log_tol) return false;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& a = pieces_[i];
      const auto& b = o.pieces_[i];
      if (a.h != b.h || std::abs(a.log_left - b.log_left) > log_tol ||
          std::abs(a.log_right - b.log_right) > log_tol) {
        return false;
      }
    }
    return true;
  }

 private:
  double staircase_top() const { return stair_->spec().log_t(1) + shift_; }

  detail::StaircaseCache& require_stair() const {
    if (!stair_) throw DomainError("Hamiltonian has no staircase");
    return *stair_;
  }

  void validate() const {
    if (!tail_.is_valid()) throw DomainError("tail matrix is not trace-normed positive semidefinite");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      if (!p.h.is_valid()) throw DomainError("piece " + std::to_string(i) + ": invalid matrix");
      if (!(p.log_left < p.log_right) || std::isnan(p.log_left) || !std::isfinite(p.log_right)) {
        throw DomainError("piece " + std::to_string(i) + ": empty or invalid interval");
      }
      if (p.log_left == kNegInf && (stair_ || i + 1 != pieces_.size())) {
        throw DomainError("piece " + std::to_string(i) + ": only the deepest piece may reach 0");
      }
      if (i > 0 && !detail::close_log(pieces_[i - 1].log_left, p.log_right)) {
        throw DomainError("pieces " + std::to_string(i - 1) + " and " + std::to_string(i) +
                          " are not contiguous");
      }
    }
    if (stair_) {
      const auto& spec = stair_->spec();
      if (!spec.zeta || !spec.log_t) throw DomainError("staircase: missing sequence provider");
      if (std::abs(spec.log_t(1)) > 1e-15) throw DomainError("staircase: t_1 must equal 1");
      if (!pieces_.empty() && !detail::close_log(pieces_.back().log_left, staircase_top())) {
        throw DomainError("staircase does not attach to the deepest explicit piece");
      }
    }
  }

  std::vector<Piece> pieces_;
  HMatrix tail_;
  std::shared_ptr<detail::StaircaseCache> stair_;
  double shift_ = 0.0;
};

inline HMatrix eval(const PiecewiseHamiltonian& h, double t) { return h.eval(t); }

/// (A_r H)(t) = H(t / r).
inline PiecewiseHamiltonian rescale(const PiecewiseHamiltonian& h, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("rescale: r must be positive and finite");
  return h.rescaled_log(std::log(r));
}

inline PiecewiseHamiltonian rescale_log(const PiecewiseHamiltonian& h, double log_r) {
  return h.rescaled_log(log_r);
}

/// One phase of a multiplicatively periodic profile: the top-down fraction of
/// the log period it occupies and its value.
struct PeriodicPhase {
  double fraction;
  HMatrix h;
};

/// Periods materialized around t = 1; the function is periodic on
/// (p^-below, p^above], constant above, and continued by the deepest phase below.
struct PeriodicWindow {
  int periods_below = 96;
  int periods_above = 48;
};

/// Multiplicatively periodic Hamiltonian, H(t / p) = H(t), built from a
/// profile partitioning (1/p, 1] from the top down in log scale.
inline PiecewiseHamiltonian make_periodic(double p, const std::vector<PeriodicPhase>& profile,
                                          PeriodicWindow window = {}) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("make_periodic: period must exceed 1");
  if (profile.empty()) throw DomainError("make_periodic: empty profile");
  if (window.periods_below < 0 || window.periods_above < 1) {
    throw DomainError("make_periodic: window must contain at least one period");
  }
  double total = 0.0;
  for (const auto& ph : profile) {
    if (!(ph.fraction > 0.0)) throw DomainError("make_periodic: fractions must be positive");
    if (!ph.h.is_valid()) throw DomainError("make_periodic: invalid matrix in profile");
    total += ph.fraction;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("make_periodic: fractions must sum to 1");

  const double lp = std::log(p);
  std::vector<Piece> pieces;
  for (int k = window.periods_above; k > -window.periods_below; --k) {
    double top = k * lp;
    double acc = 0.0;
    for (std::size_t j = 0; j < profile.size(); ++j) {
      acc += profile[j].fraction;
      // the last phase closes the period exactly
      const double bottom = (j + 1 == profile.size()) ? (k - 1) * lp : k * lp - acc * lp;
      pieces.push_back({bottom, top, profile[j].h});
      top = bottom;
    }
  }
  return PiecewiseHamiltonian(std::move(pieces), profile.back().h);
}

/// Alternation a, b, a, ... on pieces of length `length`/n covering
/// (0, length], then `tail`. Period 2 length / n in t.
inline PiecewiseHamiltonian make_alternating(int n, const HMatrix& a, const HMatrix& b, double length,
                                             const HMatrix& tail) {
  if (n < 1) throw DomainError("make_alternating: n must be positive");
  if (!(length > 0.0) || !std::isfinite(length)) throw DomainError("make_alternating: length must be positive");
  std::vector<Piece> pieces;
  for (int k = n; k >= 1; --k) {
    const double left = k == 1 ? kNegInf : std::log(length * (k - 1) / n);
    pieces.push_back({left, std::log(length * k / n), (k % 2 == 1) ? a : b});
  }
  return PiecewiseHamiltonian(std::move(pieces), tail);
}

/// Checks the staircase hypotheses on the prefix spec.check_prefix:
/// t_1 = 1, strict decrease, eventually nonincreasing ratios below the
/// threshold, shrinking chordal gaps, and points in the closed half-plane.
inline void check_staircase_spec(const StaircaseSpec& spec) {
  if (!spec.zeta || !spec.log_t) throw DomainError("staircase: missing sequence provider");
  const std::size_t n = std::max<std::size_t>(spec.check_prefix, 4);
  if (std::abs(spec.log_t(1)) > 1e-15) throw DomainError("staircase: t_1 must equal 1");
  std::vector<double> lt(n + 2);
  for (std::size_t k = 1; k <= n + 1; ++k) lt[k] = spec.log_t(k);
  const double log_thr = std::log(spec.ratio_threshold);
  for (std::size_t k = 1; k <= n; ++k) {
    if (!(lt[k + 1] < lt[k])) throw DomainError("staircase: t_n not strictly decreasing at n = " + std::to_string(k));
    const double ratio = lt[k + 1] - lt[k];
    if (k + 1 <= n && ratio <= log_thr && lt[k + 2] - lt[k + 1] > ratio + 1e-12) {
      throw DomainError("staircase: ratio t_{n+1}/t_n increases below the threshold at n = " + std::to_string(k));
    }
  }
  if (!(lt[n + 1] - lt[n] <= log_thr)) throw DomainError("staircase: ratio t_{n+1}/t_n does not decay");

  std::vector<ExtendedPoint> z(n + 1);
  for (std::size_t k = 1; k <= n; ++k) {
    z[k] = spec.zeta(k);
    if (!z[k].in_closed_upper()) throw DomainError("staircase: ζ_n outside the closed upper half-plane");
  }
  double first = 0.0;
  double second = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double g = chordal_distance(z[k], z[k + 1]);
    (k < n / 2 ? first : second) = std::max(k < n / 2 ? first : second, g);
  }
  if (second > 0.0 && !(second < first)) {
    throw DomainError("staircase: chordal gaps χ(ζ_{n+1}, ζ_n) do not shrink");
  }
}

/// Θ(ζ_n) on (t_{n+1}, t_n] and Θ(0) on (1, ∞).
inline PiecewiseHamiltonian make_staircase(StaircaseSpec spec) {
  check_staircase_spec(spec);
  return PiecewiseHamiltonian::with_staircase({}, theta(ExtendedPoint(0.0)), std::move(spec));
}

/// A value with a certified additive error bound.
struct Certified {
  double value;
  double bound;
};

/// Default depth below T used for staircases in integral functionals.
inline constexpr double kDefaultLogDepth = -64.0 * 0.6931471805599453;

/// ∫_0^T ||H1(t) - H2(t)|| dt (entrywise l1 norm), exact on the merged
/// partition. When a staircase is involved, the part below T·e^log_depth is
/// dropped and bounded by 4 T e^log_depth.
inline Certified restrict_l1_distance(const PiecewiseHamiltonian& a, const PiecewiseHamiltonian& b, double T,
                                      double log_depth = kDefaultLogDepth) {
  if (!(T > 0.0)) throw DomainError("restrict_l1_distance: T must be positive");
  const double hi = std::log(T);
  const bool trunc = a.has_staircase() || b.has_staircase();
  const double lo = trunc ? hi + log_depth : kNegInf;
  const auto sa = a.segments(lo, hi);
  const auto sb = b.segments(lo, hi);
  double sum = 0.0;
  double cur = lo;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < sa.size() && j < sb.size()) {
    const double next = std::min(sa[i].log_right, sb[j].log_right);
    if (next > cur) sum += l1_distance(sa[i].h, sb[j].h) * log_interval_length(cur, next);
    cur = next;
    if (sa[i].log_right <= next) ++i;
    if (sb[j].log_right <= next) ++j;
  }
  return {sum, trunc ? 4.0 * std::exp(lo) : 0.0};
}

/// Step function on (0, T]: value[k] on (breaks[k], breaks[k+1]], breaks[0] = 0.
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  static StepFunction constant(double T, double v) { return {{0.0, T}, {v}}; }

  void validate() const {
    if (breaks.size() < 2 || values.size() + 1 != breaks.size() || breaks.front() != 0.0) {
      throw DomainError("StepFunction: need breaks 0 = b0 < ... < bm and m values");
    }
    for (std::size_t k = 1; k < breaks.size(); ++k) {
      if (!(breaks[k] > breaks[k - 1])) throw DomainError("StepFunction: breaks must increase");
    }
  }
};

/// ∫_0^T e_row^T H(t) e_col f(t) dt for basis vectors e_row, e_col (indices
/// 0 or 1), exact on the merged partition.
inline double weak_pairing(const PiecewiseHamiltonian& h, int row, int col, const StepFunction& f) {
  f.validate();
  if ((row != 0 && row != 1) || (col != 0 && col != 1)) throw DomainError("weak_pairing: basis index must be 0 or 1");
  const double T = f.breaks.back();
  const double hi = std::log(T);
  const double lo = h.has_staircase() ? hi - 700.0 : kNegInf;
  double sum = 0.0;
  std::size_t k = 0;
  for (const auto& s : h.segments(lo, hi)) {
    const double a = s.log_left == kNegInf ? 0.0 : std::exp(s.log_left);
    const double b = std::exp(s.log_right);
    const double v = s.h.entry(row, col);
    while (k + 1 < f.breaks.size() && f.breaks[k + 1] <= a) ++k;
    for (std::size_t m = k; m + 1 < f.breaks.size() && f.breaks[m] < b; ++m) {
      const double l = std::max(a, f.breaks[m]);
      const double r = std::min(b, f.breaks[m + 1]);
      if (r > l) sum += v * f.values[m] * (r - l);
    }
  }
  return sum;
}

}  // namespace cansys
