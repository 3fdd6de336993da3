#pragma once

// JSON for points, clouds, targets and Hamiltonians; CSV for samples.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cansys/cluster.hpp"
#include "cansys/error.hpp"
#include "cansys/halfplane.hpp"
#include "cansys/hamiltonian.hpp"

namespace cansys::io {

using json = nlohmann::json;

inline json to_json(const ExtendedPoint& p) {
  if (p.is_infinite()) return "inf";
  return {{"re", p.real()}, {"im", p.imag()}};
}

inline ExtendedPoint point_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return ExtendedPoint::infinity();
    throw DomainError("point: the only string form is \"inf\"");
  }
  if (!j.is_object() || !j.contains("re") || !j.contains("im") || !j["re"].is_number() || !j["im"].is_number()) {
    throw DomainError("point: expected {\"re\": x, \"im\": y} or \"inf\"");
  }
  return ExtendedPoint(j["re"].get<double>(), j["im"].get<double>());
}

inline json to_json(const PointCloud& c) {
  json a = json::array();
  for (const auto& p : c) a.push_back(to_json(p));
  return a;
}

inline PointCloud cloud_from_json(const json& j) {
  if (!j.is_array()) throw DomainError("cloud: expected an array of points");
  PointCloud c;
  for (const auto& e : j) c.push_back(point_from_json(e));
  return c;
}

/// Accepts {"curve": [...]} or a bare array of points.
inline TargetSet target_from_json(const json& j) {
  TargetSet t{cloud_from_json(j.is_object() && j.contains("curve") ? j["curve"] : j)};
  t.validate();
  return t;
}

inline json to_json(const TargetSet& t) { return {{"curve", to_json(t.curve)}}; }

inline json to_json(const HMatrix& h) { return json::array({h.h1, h.h2, h.h3}); }

inline HMatrix hmatrix_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw DomainError("matrix: expected [h1, h2, h3]");
  for (const auto& e : j) {
    if (!e.is_number()) throw DomainError("matrix: entries must be numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

namespace detail {

inline json log_bound(double x) {
  if (x == kNegInf) return nullptr;
  return x;
}

inline double log_bound_from(const json& j, const char* what) {
  if (j.is_null()) return kNegInf;
  if (!j.is_number()) throw DomainError(std::string("piece: ") + what + " must be a number or null");
  return j.get<double>();
}

}  // namespace detail

/// {"pieces": [{"log_left", "log_right", "h"}...], "tail": h, "staircase": {...} | null}.
/// Staircases serialize through their provenance (curve and ratio base);
/// a staircase built from arbitrary sequence providers has no JSON form.
inline json to_json(const PiecewiseHamiltonian& H) {
  json pieces = json::array();
  for (const auto& p : H.pieces()) {
    pieces.push_back({{"log_left", detail::log_bound(p.log_left)}, {"log_right", p.log_right}, {"h", to_json(p.h)}});
  }
  json out{{"pieces", pieces}, {"tail", to_json(H.tail())}, {"staircase", nullptr}};
  if (const auto* spec = H.staircase_spec()) {
    if (!spec->provenance) throw DomainError("serialize: staircase has no provenance");
    const auto& pv = *spec->provenance;
    out["staircase"] = {
        {"curve", to_json(pv.curve)},
        {"sweep", {{"n_max", pv.n_max}, {"rule", "pass k: forward and back in ceil(L k) equal chordal steps"}}},
        {"log_ratio_base", pv.log_ratio_base},
        {"t_sequence", "log t_n = -n(n-1)/2 * log_ratio_base"},
        {"log_shift", H.staircase_shift()},
    };
  }
  return out;
}

inline PiecewiseHamiltonian hamiltonian_from_json(const json& j) {
  if (!j.is_object() || !j.contains("tail")) throw DomainError("hamiltonian: expected an object with a tail");
  std::vector<Piece> pieces;
  if (j.contains("pieces")) {
    if (!j["pieces"].is_array()) throw DomainError("hamiltonian: pieces must be an array");
    for (const auto& p : j["pieces"]) {
      if (!p.is_object() || !p.contains("log_right") || !p.contains("h")) {
        throw DomainError("hamiltonian: piece needs log_left, log_right and h");
      }
      pieces.push_back({detail::log_bound_from(p.value("log_left", json()), "log_left"),
                        detail::log_bound_from(p["log_right"], "log_right"), hmatrix_from_json(p["h"])});
    }
  }
  const HMatrix tail = hmatrix_from_json(j["tail"]);
  if (!j.contains("staircase") || j["staircase"].is_null()) return PiecewiseHamiltonian(std::move(pieces), tail);
  const json& s = j["staircase"];
  if (!s.is_object() || !s.contains("curve")) throw DomainError("hamiltonian: staircase needs a curve");
  const TargetSet target = target_from_json(s["curve"]);
  const double base = s.value("log_ratio_base", std::log(2.0));
  if (!(base > 0.0) || !std::isfinite(base)) throw DomainError("hamiltonian: log_ratio_base must be positive");
  std::size_t n_max = 1;
  if (s.contains("sweep") && s["sweep"].is_object() && s["sweep"].contains("n_max")) {
    n_max = s["sweep"]["n_max"].get<std::size_t>();
  }
  StaircaseSpec spec;
  spec.zeta = SweepSequence(target);
  spec.log_t = default_log_t(base);
  spec.provenance = StaircaseProvenance{target.curve, n_max, base};
  check_staircase_spec(spec);
  return PiecewiseHamiltonian::with_staircase(std::move(pieces), tail, std::move(spec), s.value("log_shift", 0.0));
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DomainError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path);
  out << text;
  if (!out) throw DomainError("write failed: " + path);
}

/// Shortest decimal form that reads back to the same double.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

struct CsvHeader {
  double tol;
  double truncation_certificate;
  std::string mode;
};

/// Header comment lines, then
/// r,theta,q_re,q_im,is_inf,chordal_to_target,log_r,certified_error.
/// r is written as inf once it overflows; log_r is always exact.
inline void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples, const CsvHeader& h,
                              const PointCloud* target) {
  os << "# tol=" << fmt(h.tol) << " truncation_certificate=" << fmt(h.truncation_certificate)
     << " mode=" << h.mode << "\n";
  os << "r,theta,q_re,q_im,is_inf,chordal_to_target,log_r,certified_error\n";
  for (const auto& s : samples) {
    const bool inf = s.q.is_infinite();
    os << fmt(std::exp(s.log_r)) << ',' << fmt(s.theta) << ',' << (inf ? "" : fmt(s.q.real())) << ','
       << (inf ? "" : fmt(s.q.imag())) << ',' << (inf ? 1 : 0) << ','
       << (target ? fmt(chordal_distance_to(s.q, *target)) : "") << ',' << fmt(s.log_r) << ','
       << fmt(s.certified_error) << "\n";
  }
}

/// Reads back what write_samples_csv wrote; `log_r` is authoritative.
inline std::vector<Sample> read_samples_csv(std::istream& is) {
  std::vector<Sample> out;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("r,theta,", 0) != 0) throw DomainError("samples csv: missing header");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    while (f.size() < 8) f.emplace_back();
    auto num = [&](const std::string& c) {
      char* end = nullptr;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || *end != '\0') throw DomainError("samples csv: bad number at line " + std::to_string(lineno));
      return v;
    };
    Sample s;
    s.log_r = num(f[6]);
    s.theta = num(f[1]);
    s.q = f[4] == "1" ? ExtendedPoint::infinity() : ExtendedPoint(num(f[2]), num(f[3]));
    s.certified_error = num(f[7]);
    out.push_back(s);
  }
  if (!header) throw DomainError("samples csv: missing header");
  return out;
}

}  // namespace cansys::io
