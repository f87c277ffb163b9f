#include "bogolab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <filesystem>
#include <future>
#include <map>

#include <json.hpp>

namespace bogolab {

using ordered_json = nlohmann::ordered_json;

RunConfig default_config() { return RunConfig{}; }

std::string config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["lattice"] = {{"sites", cfg.sites}, {"length", cfg.length}};
  j["interaction"] = {{"kind", to_string(cfg.kind)},
                      {"strength", cfg.strength},
                      {"epsilon", cfg.epsilon}};
  j["trap"] = {{"amplitude", cfg.trap_amplitude}, {"tau", cfg.trap_tau}};
  j["initial"] = cfg.initial;
  j["N"] = cfg.particle_numbers;
  j["t1"] = cfg.t1;
  j["dt"] = cfg.dt;
  j["k_max"] = cfg.k_max;
  j["output_every"] = cfg.output_every;
  j["seed"] = cfg.seed;
  j["out_dir"] = cfg.out_dir;
  return j.dump(2) + "\n";
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(const ordered_json& j) : root_(j) {}

  template <typename T>
  void read(const ordered_json& obj, const std::string& path, const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const std::exception&) {
      violations_.push_back(path + "/" + key + ": wrong type");
    }
  }

  void check_known(const ordered_json& obj, const std::string& path,
                   std::initializer_list<const char*> known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (const char* k : known)
        if (it.key() == k) found = true;
      if (!found) violations_.push_back("unknown key " + path + "/" + it.key());
    }
  }

  std::vector<std::string>& violations() { return violations_; }

 private:
  const ordered_json& root_;
  std::vector<std::string> violations_;
};

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg = default_config();
  ConfigReader rd(j);
  rd.check_known(j, "", {"lattice", "interaction", "trap", "initial", "N", "t1", "dt", "k_max",
                         "output_every", "seed", "out_dir"});
  if (j.contains("lattice")) {
    const auto& l = j["lattice"];
    rd.check_known(l, "/lattice", {"sites", "length"});
    rd.read(l, "/lattice", "sites", cfg.sites);
    rd.read(l, "/lattice", "length", cfg.length);
  }
  if (j.contains("interaction")) {
    const auto& l = j["interaction"];
    rd.check_known(l, "/interaction", {"kind", "strength", "epsilon"});
    std::string kind = to_string(cfg.kind);
    rd.read(l, "/interaction", "kind", kind);
    try {
      cfg.kind = interaction_kind_from_string(kind);
    } catch (const std::exception& e) {
      rd.violations().push_back(std::string("/interaction/kind: ") + e.what());
    }
    rd.read(l, "/interaction", "strength", cfg.strength);
    rd.read(l, "/interaction", "epsilon", cfg.epsilon);
  }
  if (j.contains("trap")) {
    const auto& l = j["trap"];
    rd.check_known(l, "/trap", {"amplitude", "tau"});
    rd.read(l, "/trap", "amplitude", cfg.trap_amplitude);
    rd.read(l, "/trap", "tau", cfg.trap_tau);
  }
  rd.read(j, "", "initial", cfg.initial);
  if (j.contains("N")) {
    if (j["N"].is_number_integer())
      cfg.particle_numbers = {j["N"].get<int>()};
    else
      rd.read(j, "", "N", cfg.particle_numbers);
  }
  rd.read(j, "", "t1", cfg.t1);
  rd.read(j, "", "dt", cfg.dt);
  rd.read(j, "", "k_max", cfg.k_max);
  rd.read(j, "", "output_every", cfg.output_every);
  rd.read(j, "", "seed", cfg.seed);
  rd.read(j, "", "out_dir", cfg.out_dir);

  auto& bad = rd.violations();
  if (cfg.sites < 2 || cfg.sites > 16) bad.push_back("lattice/sites must be in [2, 16]");
  if (!(cfg.length > 0.0)) bad.push_back("lattice/length must be positive");
  if (!(cfg.epsilon > 0.0) && (cfg.kind == InteractionKind::SoftCoulomb ||
                               cfg.kind == InteractionKind::Gaussian))
    bad.push_back("interaction/epsilon must be positive for this kind");
  if (cfg.particle_numbers.empty()) bad.push_back("N must name at least one particle number");
  for (int n : cfg.particle_numbers) {
    if (n < 2) bad.push_back("N = " + std::to_string(n) + " rejected (lambda_N undefined)");
    if (cfg.sites >= 2 && n >= 2) {
      const std::size_t dim = FockBasis::dimension_of(n, cfg.sites);
      if (dim > FockBasis::kDefaultCap)
        bad.push_back("N = " + std::to_string(n) + " gives sector dimension " +
                      std::to_string(dim) + " above the cap");
    }
  }
  if (!(cfg.dt > 0.0)) bad.push_back("dt must be positive");
  if (!(cfg.t1 >= 0.0)) bad.push_back("t1 must be nonnegative");
  if (cfg.k_max < 2 || cfg.k_max > 16) bad.push_back("k_max must be in [2, 16]");
  if (cfg.sites >= 2 && cfg.k_max >= 2) {
    const std::size_t hdim = FockBasis::dimension_of(cfg.k_max, cfg.sites);
    if (hdim > FockBasis::kDefaultCap)
      bad.push_back("k_max = " + std::to_string(cfg.k_max) + " gives hierarchy sector dimension " +
                    std::to_string(hdim) + " above the cap");
  }
  if (cfg.output_every < 1) bad.push_back("output_every must be at least 1");
  if (cfg.initial != "product" && cfg.initial != "ground")
    bad.push_back("initial must be 'product' or 'ground'");
  if (!bad.empty()) {
    std::string msg = "invalid config:";
    for (const auto& v : bad) msg += "\n  - " + v;
    throw std::invalid_argument(msg);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

// -- scenario -----------------------------------------------------------------

ScenarioResult run_scenario(const RunConfig& cfg, int particles) {
  const LatticeSpace space = cfg.make_space();
  const PotentialSchedule schedule = cfg.make_schedule(space);
  const Interaction vint = cfg.make_interaction(space);

  const OneBodyField phi0 = (cfg.initial == "ground")
                                ? hartree_minimizer(space, schedule, vint)
                                : one_body_ground_state(space, schedule);
  const HartreeTrajectory traj =
      evolve_hartree(space, schedule, vint, phi0, cfg.t1, cfg.dt);

  const BasisPtr basis = FockBasis::make(particles, space.sites);
  ManyBodyState psi0 = product_state(space, phi0, basis);
  if (cfg.initial == "ground") {
    FullHamiltonian h0(space, schedule, vint, basis);
    h0.prepare(0.0);
    const auto gs = ground_state([&](const Vec& v) { return h0.apply(v); }, basis->dim());
    psi0 = ManyBodyState{basis, gs.state};
  }

  ScenarioResult out;
  out.particles = particles;
  out.hartree_renorm_defect = traj.max_renorm_defect();
  out.assumptions = check_assumptions_A2(space, schedule, vint, psi0, phi0);

  const long nsteps = std::max<long>(1, std::lround(cfg.t1 / cfg.dt));
  const auto is_output = [&](long step) {
    return step % cfg.output_every == 0 || step == nsteps;
  };
  const auto step_of = [&](double t) { return std::lround(t / cfg.dt); };

  // fluctuation layers: Bogoliubov hierarchy and (gamma, alpha)
  ExcitationVector chi0 = excitation_decompose(space, psi0, phi0);
  if (chi0.k_max() > cfg.k_max) chi0.chi.resize(cfg.k_max + 1);
  std::map<long, ExcitationVector> chi_at;
  chi_at.emplace(0, chi0);
  HierarchyOptions hopts;
  hopts.k_max = cfg.k_max;
  const HierarchyRun hier = evolve_hierarchy(
      space, schedule, vint, traj, chi0, 0.0, cfg.t1, cfg.dt, hopts,
      [&](double t, const ExcitationVector& c) {
        const long s = step_of(t);
        if (is_output(s)) chi_at.emplace(s, c);
      });
  out.hierarchy_norm_drift = hier.max_norm_drift;
  out.hierarchy_k_max = hier.final_k_max;

  CorrelationPair pair0 = correlations_from_chi(chi0);
  std::map<long, CorrelationPair> pair_at;
  pair_at.emplace(0, pair0);
  evolve_pair(space, schedule, vint, traj, pair0, 0.0, cfg.t1, cfg.dt,
              [&](double t, const CorrelationPair& p) {
                const long s = step_of(t);
                if (is_output(s)) pair_at.emplace(s, p);
              });

  // many-body layers
  std::map<long, Vec> psi_at, tilde_at;
  psi_at.emplace(0, psi0.amplitudes);
  tilde_at.emplace(0, psi0.amplitudes);
  PropagationOptions popts;
  {
    FullHamiltonian h(space, schedule, vint, basis);
    Vec psi = psi0.amplitudes;
    const auto record = [&](double t, const Vec& v) {
      const long s = step_of(t);
      if (is_output(s)) psi_at.emplace(s, v);
    };
    const long split =
        schedule.static_on(0.0, cfg.t1)
            ? 0
            : std::min<long>(nsteps, std::lround(std::ceil(schedule.tau / cfg.dt - 1e-9)));
    if (split > 0)
      propagate(psi, [&](double t) { h.prepare(t); },
                [&](const Vec& v) { return h.apply(v); }, basis->dim(), false, 0.0,
                split * cfg.dt, cfg.dt, popts, out.stats_full, record);
    if (split < nsteps)
      propagate(psi, [&](double t) { h.prepare(t); },
                [&](const Vec& v) { return h.apply(v); }, basis->dim(), true, split * cfg.dt,
                cfg.t1, cfg.dt, popts, out.stats_full, record);
  }
  {
    TildeHamiltonian ht(space, schedule, vint, basis, traj);
    Vec psi = psi0.amplitudes;
    propagate(psi, [&](double t) { ht.prepare(t); },
              [&](const Vec& v) { return ht.apply(v); }, basis->dim(), false, 0.0, cfg.t1,
              cfg.dt, popts, out.stats_tilde, [&](double t, const Vec& v) {
                const long s = step_of(t);
                if (is_output(s)) tilde_at.emplace(s, v);
              });
  }

  // reports on the shared output grid
  for (const auto& [s, psi_amp] : psi_at) {
    if (!tilde_at.count(s) || !chi_at.count(s)) continue;
    const double t = s * cfg.dt;
    const OneBodyField phi_t = traj.field_at(t);
    const ManyBodyState psi{basis, psi_amp};
    const ManyBodyState tilde{basis, tilde_at.at(s)};
    out.reports.push_back(make_distance_report(t, space, psi, tilde, phi_t, chi_at.at(s)));
    if (pair_at.count(s)) {
      const CorrelationPair from_chi = correlations_from_chi(chi_at.at(s));
      const CorrelationPair& evolved = pair_at.at(s);
      out.pair_vs_hierarchy =
          std::max(out.pair_vs_hierarchy, (from_chi.gamma - evolved.gamma).norm() +
                                              (from_chi.alpha - evolved.alpha).norm());
    }
  }
  return out;
}

// -- sweep and fit --------------------------------------------------------------

LogLogFit fit_loglog(const std::vector<int>& ns, const std::vector<double>& values,
                     double floor) {
  LogLogFit out;
  if (ns.size() < 3 || ns.size() != values.size()) return out;
  for (double v : values)
    if (!(v > floor)) return out;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double x = std::log(static_cast<double>(ns[i]));
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  if (den <= 1e-12) return out;
  out.slope = (n * sxy - sx * sy) / den;
  out.intercept = (sy - out.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double r =
        std::log(values[i]) - out.slope * std::log(static_cast<double>(ns[i])) - out.intercept;
    ss += r * r;
  }
  out.residual = std::sqrt(ss / n);
  out.degenerate = false;
  return out;
}

SweepResult sweep_and_fit(const RunConfig& cfg) {
  SweepResult sweep;
  sweep.config = cfg;
  sweep.particle_numbers = cfg.particle_numbers;
  sweep.rates_enforced = (cfg.initial == "product");

  std::vector<std::future<ScenarioResult>> futures;
  futures.reserve(cfg.particle_numbers.size());
  for (int n : cfg.particle_numbers)
    futures.push_back(
        std::async(std::launch::async, [&cfg, n]() { return run_scenario(cfg, n); }));
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      sweep.runs.push_back(futures[i].get());
    } catch (const std::exception& e) {
      sweep.errors.push_back("N=" + std::to_string(cfg.particle_numbers[i]) + ": " + e.what());
    }
  }

  struct RateWindow {
    const char* name;
    double expected, lo, hi;
    double DistanceReport::* field;
  };
  const RateWindow windows[] = {
      {"l2_full", -0.5, -0.80, -0.30, &DistanceReport::l2_full},
      {"trace_dist", -1.0, -1.35, -0.70, &DistanceReport::trace_dist},
      {"energy_trace_dist", -0.5, -0.85, -0.25, &DistanceReport::energy_trace_dist},
      {"chi_l2_sq", -1.0, -1.40, -0.65, &DistanceReport::chi_l2_sq},
      {"counting_q1", -1.0, -1.5, -0.5, &DistanceReport::counting1},
      {"counting_q2", -2.0, -2.5, -1.5, &DistanceReport::counting2},
      {"counting_q3", -3.0, -3.5, -2.5, &DistanceReport::counting3},
  };
  std::vector<int> ns;
  for (const auto& run : sweep.runs) ns.push_back(run.particles);
  for (const auto& s : windows) {
    RateObservable obs;
    obs.name = s.name;
    obs.expected = s.expected;
    obs.window_lo = s.lo;
    obs.window_hi = s.hi;
    for (const auto& run : sweep.runs)
      obs.values.push_back(run.reports.empty() ? 0.0 : run.reports.back().*(s.field));
    const LogLogFit fit = fit_loglog(ns, obs.values);
    obs.degenerate = fit.degenerate;
    if (!fit.degenerate) {
      obs.slope = fit.slope;
      obs.intercept = fit.intercept;
      obs.residual = fit.residual;
      obs.pass = fit.slope >= s.lo && fit.slope <= s.hi;
    } else {
      obs.pass = true;  // degenerate fit is reported, not failed
    }
    obs.monotone_decreasing = true;
    for (std::size_t i = 1; i < obs.values.size(); ++i)
      if (!(obs.values[i] < obs.values[i - 1] * (1.0 + 1e-9))) obs.monotone_decreasing = false;
    sweep.rates.push_back(std::move(obs));
  }

  std::vector<AssumptionReport> reports;
  for (const auto& run : sweep.runs) reports.push_back(run.assumptions);
  if (reports.size() >= 3)
    sweep.assumptions = grade_assumptions_A2(ns, reports);
  else if (!reports.empty())
    sweep.assumptions = reports.back();

  sweep.all_pass = sweep.errors.empty();
  if (sweep.rates_enforced)
    for (const auto& r : sweep.rates)
      if (!r.pass) sweep.all_pass = false;
  return sweep;
}

// -- outputs --------------------------------------------------------------------

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12e", x);
  return buf;
}

ordered_json json_or_null(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

}  // namespace

void emit_outputs(const SweepResult& sweep, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir))
    throw std::runtime_error("emit_outputs: cannot create output directory " + out_dir);

  {
    std::ofstream csv(fs::path(out_dir) / "timeseries.csv", std::ios::binary);
    if (!csv) throw std::runtime_error("emit_outputs: unwritable path " + out_dir);
    csv << "N,t,l2_full,trace_dist,energy_trace_dist,chi_l2_sq,"
           "counting_q1,counting_q2,counting_q3,parity_even,parity_odd\n";
    for (const auto& run : sweep.runs)
      for (const auto& r : run.reports)
        csv << run.particles << ',' << fmt(r.t) << ',' << fmt(r.l2_full) << ','
            << fmt(r.trace_dist) << ',' << fmt(r.energy_trace_dist) << ',' << fmt(r.chi_l2_sq)
            << ',' << fmt(r.counting1) << ',' << fmt(r.counting2) << ',' << fmt(r.counting3)
            << ',' << fmt(r.parity_even) << ',' << fmt(r.parity_odd) << '\n';
  }
  {
    std::ofstream csv(fs::path(out_dir) / "rates.csv", std::ios::binary);
    csv << "N";
    for (const auto& r : sweep.rates) csv << ',' << r.name;
    csv << '\n';
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
      csv << sweep.runs[i].particles;
      for (const auto& r : sweep.rates) csv << ',' << fmt(r.values[i]);
      csv << '\n';
    }
  }
  {
    ordered_json j;
    j["config"] = ordered_json::parse(config_to_json(sweep.config));
    ordered_json rates = ordered_json::array();
    for (const auto& r : sweep.rates) {
      ordered_json o;
      o["name"] = r.name;
      o["expected_exponent"] = r.expected;
      o["window"] = {r.window_lo, r.window_hi};
      o["values_at_t1"] = r.values;
      o["slope"] = json_or_null(r.slope);
      o["intercept"] = json_or_null(r.intercept);
      o["residual"] = json_or_null(r.residual);
      o["degenerate"] = r.degenerate;
      o["monotone_decreasing"] = r.monotone_decreasing;
      o["pass"] = r.pass;
      rates.push_back(o);
    }
    j["particle_numbers"] = sweep.particle_numbers;
    j["rates"] = rates;
    j["rates_enforced"] = sweep.rates_enforced;
    {
      const auto& a = sweep.assumptions;
      ordered_json ja;
      ja["energy_gap"] = a.energy_gap;
      ja["counting"] = {a.counting1, a.counting2, a.counting3};
      ja["odd_norm"] = a.odd_norm;
      ja["gap_exponent"] = json_or_null(a.gap_exponent);
      ja["counting_exponents"] = ordered_json::array();
      for (int i = 0; i < 3; ++i) ja["counting_exponents"].push_back(
          json_or_null(a.counting_exponent[i]));
      ja["odd_exponent"] = json_or_null(a.odd_exponent);
      ja["pass"] = {{"gap", a.pass_gap},
                    {"counting1", a.pass_counting[0]},
                    {"counting2", a.pass_counting[1]},
                    {"counting3", a.pass_counting[2]},
                    {"odd", a.pass_odd}};
      j["assumptions"] = ja;
    }
    ordered_json runs = ordered_json::array();
    for (const auto& run : sweep.runs) {
      ordered_json o;
      o["N"] = run.particles;
      o["steps"] = run.stats_full.steps;
      o["max_norm_drift_full"] = run.stats_full.max_norm_drift;
      o["max_norm_drift_tilde"] = run.stats_tilde.max_norm_drift;
      o["hierarchy_norm_drift"] = run.hierarchy_norm_drift;
      o["hierarchy_k_max"] = run.hierarchy_k_max;
      o["pair_vs_hierarchy"] = run.pair_vs_hierarchy;
      o["hartree_renorm_defect"] = run.hartree_renorm_defect;
      if (!run.reports.empty()) {
        const auto& r = run.reports.back();
        o["final"] = {{"t", r.t},
                      {"l2_full", r.l2_full},
                      {"trace_dist", r.trace_dist},
                      {"energy_trace_dist", r.energy_trace_dist},
                      {"chi_l2_sq", r.chi_l2_sq},
                      {"counting_q1", r.counting1},
                      {"counting_q2", r.counting2},
                      {"counting_q3", r.counting3},
                      {"parity_even", r.parity_even},
                      {"parity_odd", r.parity_odd}};
      }
      runs.push_back(o);
    }
    j["runs"] = runs;
    j["errors"] = sweep.errors;
    j["all_pass"] = sweep.all_pass;
    std::ofstream js(fs::path(out_dir) / "summary.json", std::ios::binary);
    js << j.dump(2) << '\n';
  }
  {
    std::ofstream gp(fs::path(out_dir) / "rates.gp", std::ios::binary);
    gp << "# log-log convergence rates; run with: gnuplot rates.gp\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 960,640\n"
          "set logscale xy\n"
          "set xlabel 'N'\n"
          "set key outside\n"
          "set output 'rates.png'\n";
    std::string plots;
    int col = 2;
    for (const auto& r : sweep.rates) {
      if (!plots.empty()) plots += ", ";
      plots += "'rates.csv' using 1:" + std::to_string(col) + " with linespoints title '" +
               r.name + "'";
      if (r.slope) {
        gp << "f" << col << "(x) = exp(" << fmt(*r.intercept) << ") * x**(" << fmt(*r.slope)
           << ")\n";
        plots += ", f" + std::to_string(col) + "(x) with lines dt 2 notitle";
      }
      ++col;
    }
    gp << "plot " << plots << "\n";
    gp << "set output 'timeseries.png'\n"
          "unset logscale\n"
          "set logscale y\n"
          "set xlabel 't'\n";
    plots.clear();
    for (const auto& run : sweep.runs) {
      if (!plots.empty()) plots += ", ";
      plots += "'timeseries.csv' using 2:($1==" + std::to_string(run.particles) +
               "?$3:1/0) with lines title 'l2 N=" + std::to_string(run.particles) + "'";
    }
    if (!plots.empty()) gp << "plot " << plots << "\n";
  }
}

}  // namespace bogolab
