#pragma once

// Experiment harness: scenario configuration, the four dynamical layers on a
// shared clock, N-sweeps with log-log rate fits, and machine-readable
// outputs (CSV + JSON + plot script).

#include <optional>
#include <string>
#include <vector>

#include "bogolab/diagnostics.hpp"
#include "bogolab/fluctuations.hpp"

namespace bogolab {

struct RunConfig {
  int sites = 5;
  double length = 5.0;
  InteractionKind kind = InteractionKind::SoftCoulomb;
  double strength = 1.0;
  double epsilon = 1.0;
  double trap_amplitude = 1.0;
  double trap_tau = 0.1;  // <= 0 keeps the trap on
  std::string initial = "product";  // product | ground
  std::vector<int> particle_numbers = {4, 6, 8, 10, 12};
  double t1 = 0.5;
  double dt = 1e-3;
  int k_max = 8;
  int output_every = 25;  // record a report every this many steps
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  LatticeSpace make_space() const { return LatticeSpace::ring(sites, length); }
  PotentialSchedule make_schedule(const LatticeSpace& s) const {
    return PotentialSchedule::harmonic_quench(s, trap_amplitude, trap_tau);
  }
  Interaction make_interaction(const LatticeSpace& s) const {
    return Interaction::make(s, kind, strength, epsilon);
  }
};

RunConfig default_config();
std::string config_to_json(const RunConfig& cfg);
// parse + validate; unknown keys and every semantic violation are reported
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

struct ScenarioResult {
  int particles = 0;
  std::vector<DistanceReport> reports;
  AssumptionReport assumptions;
  PropagationStats stats_full, stats_tilde;
  double hierarchy_norm_drift = 0.0;
  int hierarchy_k_max = 0;
  double hartree_renorm_defect = 0.0;
  double pair_vs_hierarchy = 0.0;  // max |gamma_h - gamma_p| + |alpha_h - alpha_p|
};

// the four layers (Hartree, H, H~, hierarchy + pair) for one particle number
ScenarioResult run_scenario(const RunConfig& cfg, int particles);

struct RateObservable {
  std::string name;
  double expected = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<double> values;  // at t1, one per N
  std::optional<double> slope, intercept, residual;
  bool degenerate = false;
  bool monotone_decreasing = false;
  bool pass = false;  // slope inside the window (degenerate fits do not fail)
};

struct SweepResult {
  RunConfig config;
  std::vector<int> particle_numbers;
  std::vector<ScenarioResult> runs;
  std::vector<RateObservable> rates;
  AssumptionReport assumptions;     // graded across the sweep
  std::vector<std::string> errors;  // per-N failures; partial results still emitted
  bool rates_enforced = true;       // report-only for ground-state scenarios
  bool all_pass = false;
};

SweepResult sweep_and_fit(const RunConfig& cfg);

// CSV (+ rates table), JSON summary and a gnuplot command file; byte-stable
// for identical config + seed
void emit_outputs(const SweepResult& sweep, const std::string& out_dir);

// least-squares log-log fit helpers (shared with diagnostics/tests)
struct LogLogFit {
  double slope = 0.0, intercept = 0.0, residual = 0.0;
  bool degenerate = true;
};
LogLogFit fit_loglog(const std::vector<int>& ns, const std::vector<double>& values,
                     double floor = 1e-13);

}  // namespace bogolab
