// cansys: construct staircase Hamiltonians for target cluster sets, sample
// their Weyl coefficients toward i∞, estimate cluster sets and run the
// property suites.
//
// Exit codes: 0 ok, 1 property failure, 2 input error, 3 tolerance not met.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cansys/cluster.hpp"
#include "cansys/error.hpp"
#include "cansys/io.hpp"
#include "cansys/verify.hpp"
#include "cansys/weyl.hpp"

using namespace cansys;
using json = nlohmann::json;

namespace {

struct Params {
  std::string hamiltonian;
  std::string target;
  std::string input;
  std::string mode = "ray";
  double theta = std::numbers::pi / 2;
  double alpha = std::numbers::pi / 4;
  double rmin = 1.0;
  double rmax = 1e6;
  std::optional<double> log_rmin;
  std::optional<double> log_rmax;
  std::size_t samples = 500;
  double tol = 1e-6;
  double tail_fraction = 0.5;
  std::uint64_t seed = verify::kDefaultSeed;
  std::string out;
  std::string config;
  std::size_t n_max = 6;
  double log_ratio_base = std::log(2.0);
  std::string inject_fault;
  std::string suite;
};

// Options registered on a subcommand, keyed by their config-file name.
struct Registered {
  std::vector<std::pair<std::string, CLI::Option*>> opts;
  void add(const std::string& key, CLI::Option* o) { opts.emplace_back(key, o); }
};

// Config keys use the long flag names with '-' replaced by '_'.
void apply_config(const Params& p, const Registered& reg) {
  if (p.config.empty()) return;
  const json cfg = io::read_json_file(p.config);
  if (!cfg.is_object()) throw DomainError("config: expected a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    CLI::Option* opt = nullptr;
    for (const auto& [k, o] : reg.opts) {
      if (k == key) opt = o;
    }
    if (!opt) throw DomainError("config: unknown or inapplicable key '" + key + "'");
    if (opt->count() > 0) continue;  // flags override the file
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_number() || value.is_boolean()) {
      text = value.dump();
    } else {
      throw DomainError("config: value of '" + key + "' must be a string or number");
    }
    opt->clear();
    try {
      opt->add_result(text);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw DomainError("config: bad value for '" + key + "': " + e.what());
    }
  }
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    io::write_text_file(path, text);
  }
}

ClusterQuery make_query(const Params& p) {
  ClusterQuery q;
  if (p.mode == "ray") {
    q.mode = QueryMode::ray;
  } else if (p.mode == "sector") {
    q.mode = QueryMode::sector;
  } else {
    throw DomainError("--mode must be ray or sector");
  }
  q.theta = p.theta;
  q.alpha = p.alpha;
  if (!p.log_rmin && !(p.rmin > 0.0)) throw DomainError("--rmin must be positive");
  if (!p.log_rmax && !(p.rmax > 0.0)) throw DomainError("--rmax must be positive");
  q.log_r_min = p.log_rmin ? *p.log_rmin : std::log(p.rmin);
  q.log_r_max = p.log_rmax ? *p.log_rmax : std::log(p.rmax);
  q.samples = p.samples;
  q.validate();
  return q;
}

std::optional<PointCloud> load_target_cloud(const Params& p) {
  if (p.target.empty()) return std::nullopt;
  return target_cloud(io::target_from_json(io::read_json_file(p.target)));
}

PiecewiseHamiltonian load_hamiltonian(const Params& p) {
  if (p.hamiltonian.empty()) throw DomainError("--hamiltonian is required");
  return io::hamiltonian_from_json(io::read_json_file(p.hamiltonian));
}

int cmd_construct(const Params& p) {
  if (p.target.empty()) throw DomainError("--target is required");
  const TargetSet t = io::target_from_json(io::read_json_file(p.target));
  const auto H = construct_for_target(t, p.n_max, p.log_ratio_base);
  emit(p.out, io::to_json(H).dump(2) + "\n");
  return 0;
}

int cmd_sample(const Params& p) {
  if (!(p.tol > 0.0)) throw DomainError("--tol must be positive");
  const auto H = load_hamiltonian(p);
  const auto q = make_query(p);
  const auto target = load_target_cloud(p);
  const auto s = sample_q(H, q, p.tol);
  std::ostringstream os;
  io::write_samples_csv(os, s, {p.tol, truncation_displacement(p.tol / 16.0), p.mode}, target ? &*target : nullptr);
  emit(p.out, os.str());
  return 0;
}

json window_r(double log_r) {
  const double r = std::exp(log_r);
  if (!std::isfinite(r)) return nullptr;
  return r;
}

int cmd_cluster(const Params& p) {
  if (!(p.tol > 0.0)) throw DomainError("--tol must be positive");
  std::vector<Sample> samples;
  std::optional<PiecewiseHamiltonian> H;
  if (!p.hamiltonian.empty()) H = load_hamiltonian(p);
  if (!p.input.empty()) {
    std::ifstream in(p.input);
    if (!in) throw DomainError("cannot open " + p.input);
    samples = io::read_samples_csv(in);
  } else if (H) {
    samples = sample_q(*H, make_query(p), p.tol);
  } else {
    throw DomainError("cluster needs --hamiltonian or --input");
  }
  if (samples.empty()) throw NumericError("no samples in the tail window", 0.0);
  const auto est = estimate_cluster(samples, p.tail_fraction, H ? &*H : nullptr);
  const auto target = load_target_cloud(p);
  json out{{"cloud", io::to_json(est.cloud)},
           {"window", {window_r(est.log_window_lo), window_r(est.log_window_hi)}},
           {"log_window", {est.log_window_lo, est.log_window_hi}},
           {"cycles", est.sweep_cycles_covered},
           {"tol", p.tol},
           {"samples_in_window", est.cloud.size()},
           {"hausdorff_to_target", nullptr}};
  double h = -1.0;
  if (target) {
    h = hausdorff_distance(est.cloud, *target);
    out["hausdorff_to_target"] = h;
  }
  if (!p.out.empty()) io::write_text_file(p.out, out.dump(2) + "\n");
  std::cout << "cycles=" << est.sweep_cycles_covered << " points=" << est.cloud.size();
  if (target) std::cout << " hausdorff_to_target=" << io::fmt(h);
  std::cout << "\n";
  if (p.out.empty()) std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_verify(const Params& p) {
  verify::Options o;
  o.seed = p.seed;
  o.only = p.suite;
  if (p.inject_fault == "sign-flip") {
    o.kernel = &verify::sign_flipped_piece_transfer;
  } else if (!p.inject_fault.empty()) {
    throw DomainError("--inject-fault accepts only sign-flip");
  }
  const auto report = verify::run(o);
  const std::string text = report.to_json().dump(2) + "\n";
  emit(p.out, text);
  for (const auto& s : report.suites) {
    std::cerr << (s.failures ? "FAIL " : "ok   ") << s.name << " " << s.failures << "/" << s.cases << "\n";
  }
  return report.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical systems: staircase construction and Weyl coefficient cluster sets"};
  app.require_subcommand(1);
  Params p;

  auto* construct = app.add_subcommand("construct", "Build the staircase Hamiltonian for a target curve");
  auto* sample = app.add_subcommand("sample", "Sample q_H(r e^{i theta}) to CSV");
  auto* cluster = app.add_subcommand("cluster", "Estimate the cluster set at i-infinity");
  auto* verifyc = app.add_subcommand("verify", "Run the randomized property suites");

  std::map<CLI::App*, Registered> reg;
  auto add = [&](CLI::App* sc, const std::string& flag, auto& var, const std::string& help) {
    auto* o = sc->add_option(flag, var, help);
    std::string key = flag.substr(2);
    std::replace(key.begin(), key.end(), '-', '_');
    reg[sc].add(key, o);
    return o;
  };

  for (auto* sc : {construct, sample, cluster, verifyc}) {
    sc->add_option("--config", p.config, "JSON file with option values; flags override it");
    add(sc, "--out", p.out, "Output path (default stdout)");
  }
  add(construct, "--target", p.target, "Target curve JSON");
  add(construct, "--n-max", p.n_max, "Number of sweep passes recorded as validated");
  add(construct, "--log-ratio-base", p.log_ratio_base, "log of the base b in t_{n+1}/t_n = b^{-n}");

  for (auto* sc : {sample, cluster}) {
    add(sc, "--hamiltonian", p.hamiltonian, "Hamiltonian JSON");
    add(sc, "--target", p.target, "Target curve JSON, for distances to the target");
    add(sc, "--mode", p.mode, "ray or sector")->check(CLI::IsMember({"ray", "sector"}));
    add(sc, "--theta", p.theta, "Ray angle in (0, pi)");
    add(sc, "--alpha", p.alpha, "Sector half-opening: directions [alpha, pi - alpha]");
    add(sc, "--rmin", p.rmin, "Smallest |z|");
    add(sc, "--rmax", p.rmax, "Largest |z|");
    add(sc, "--log-rmin", p.log_rmin, "log of the smallest |z| (overrides --rmin)");
    add(sc, "--log-rmax", p.log_rmax, "log of the largest |z| (overrides --rmax)");
    add(sc, "--samples", p.samples, "Number of samples");
    add(sc, "--tol", p.tol, "Chordal tolerance per sample");
  }
  add(cluster, "--tail-fraction", p.tail_fraction, "Top fraction of the log r range kept");
  add(cluster, "--input", p.input, "Samples CSV written by `sample` (instead of sampling)");
  add(verifyc, "--seed", p.seed, "Seed of the randomized suites");
  add(verifyc, "--inject-fault", p.inject_fault, "Mutant kernel: sign-flip");
  add(verifyc, "--suite", p.suite, "Run a single suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    for (auto* sc : app.get_subcommands()) apply_config(p, reg[sc]);
    if (construct->parsed()) return cmd_construct(p);
    if (sample->parsed()) return cmd_sample(p);
    if (cluster->parsed()) return cmd_cluster(p);
    return cmd_verify(p);
  } catch (const NumericError& e) {
    std::cerr << "cansys: " << e.what() << " (achieved bound " << e.achieved_bound() << ")\n";
    return 3;
  } catch (const DomainError& e) {
    std::cerr << "cansys: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "cansys: " << e.what() << "\n";
    return 2;
  }
}
