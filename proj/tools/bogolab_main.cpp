// bogolab CLI: run scenarios, sweep particle numbers with rate fits, or run
// the exact operator-identity suite.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bogolab/harness.hpp"
#include "bogolab/identity_suite.hpp"

namespace {

int emit_and_report(bogolab::SweepResult& sweep, const std::string& out_override,
                    bool enforce_rates) {
  if (!out_override.empty()) sweep.config.out_dir = out_override;
  if (!enforce_rates) {
    sweep.rates_enforced = false;
    sweep.all_pass = sweep.errors.empty();
  }
  bogolab::emit_outputs(sweep, sweep.config.out_dir);
  for (const auto& e : sweep.errors) std::cerr << "[error] " << e << "\n";
  for (const auto& r : sweep.rates) {
    std::printf("%-18s", r.name.c_str());
    if (r.degenerate)
      std::printf(" slope: degenerate fit");
    else
      std::printf(" slope % .3f in [% .2f, % .2f] expected % .1f", *r.slope, r.window_lo,
                  r.window_hi, r.expected);
    std::printf("  %s\n", !sweep.rates_enforced ? "report" : (r.pass ? "pass" : "FAIL"));
  }
  std::printf("outputs written to %s\n", sweep.config.out_dir.c_str());
  return sweep.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale mean-field Bose gas laboratory"};
  app.require_subcommand(0, 1);

  bool print_defaults = false;
  app.add_flag("--print-defaults", print_defaults, "print the default config as JSON and exit");

  std::string config_path, out_dir;
  auto* run_cmd = app.add_subcommand("run", "run the four dynamical layers for each configured N");
  run_cmd->add_option("config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory override");

  auto* sweep_cmd =
      app.add_subcommand("sweep", "sweep N and fit log-log convergence rates (needs >= 3 N)");
  sweep_cmd->add_option("config", config_path, "JSON config file")->required();
  sweep_cmd->add_option("--out", out_dir, "output directory override");

  std::uint64_t seed = 0;
  std::vector<int> sizes;
  auto* check_cmd = app.add_subcommand("check-identities", "exact operator-identity suite");
  check_cmd->add_option("--seed", seed, "base seed (suite runs seeds seed..seed+4)");
  check_cmd->add_option("--sizes", sizes, "flat N,M list, e.g. --sizes 2,3,3,3")
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << bogolab::config_to_json(bogolab::default_config());
    return 0;
  }

  try {
    if (run_cmd->parsed()) {
      bogolab::RunConfig cfg = bogolab::parse_config(config_path);
      auto sweep = bogolab::sweep_and_fit(cfg);
      return emit_and_report(sweep, out_dir, /*enforce_rates=*/false);
    }
    if (sweep_cmd->parsed()) {
      bogolab::RunConfig cfg = bogolab::parse_config(config_path);
      if (cfg.particle_numbers.size() < 3)
        throw std::invalid_argument("sweep needs at least 3 particle numbers in N");
      auto sweep = bogolab::sweep_and_fit(cfg);
      return emit_and_report(sweep, out_dir, cfg.initial == "product");
    }
    if (check_cmd->parsed()) {
      bogolab::IdentitySuiteOptions opts;
      if (seed != 0) {
        opts.seeds.clear();
        for (std::uint64_t s = seed; s < seed + 5; ++s) opts.seeds.push_back(s);
      }
      if (!sizes.empty()) {
        if (sizes.size() % 2 != 0)
          throw std::invalid_argument("--sizes expects pairs of N M values");
        opts.sizes.clear();
        for (std::size_t i = 0; i + 1 < sizes.size(); i += 2)
          opts.sizes.push_back({sizes[i], sizes[i + 1]});
      }
      const auto checks = bogolab::run_identity_suite(opts);
      bool ok = true;
      for (const auto& c : checks) {
        std::printf("[%s] %-70s defect %.3e (tol %.0e)\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.defect, c.tolerance);
        ok = ok && c.pass;
      }
      std::printf("%zu checks, %s\n", checks.size(), ok ? "all passed" : "FAILURES present");
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cout << app.help();
  return 0;
}
