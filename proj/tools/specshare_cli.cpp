// Command-line front end: simulate, verify and the figure reproductions.

#include "specshare/cli_io.hpp"
#include "specshare/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace specshare;

namespace {

int report(const CommandResult& res) {
  std::cerr << res.message;
  for (const auto& p : res.written) std::cout << p.string() << '\n';
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum-sharing simulator and equilibrium verifier"};
  app.require_subcommand(1);

  std::string out_dir = ".";
  std::string scenario;
  std::string grid;
  std::uint64_t seed = 1;
  int replications = 0;

  auto* sim = app.add_subcommand("simulate", "run a scenario file; writes trace.csv and summary.csv");
  sim->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory");
  auto* sim_seed = sim->add_option("--seed", seed, "override sim.seed");
  auto* sim_reps = sim->add_option("--replications", replications, "override sim.replications");

  auto* ver = app.add_subcommand("verify", "one-shot deviation check; exit 0 iff nothing is profitable");
  ver->add_option("scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);
  ver->add_option("--out", out_dir, "output directory");

  auto* f2 = app.add_subcommand("fig2", "n* against the entry cost (Linear pi, P = 100, E[Lambda] = 1/2)");
  f2->add_option("--out", out_dir, "output directory");
  f2->add_option("--grid", grid, "costs as start:stop:step or a comma list")->default_str("10:500:10");

  Fig3Options fig3;
  auto* f3 = app.add_subcommand("fig3", "total revenue against P in dB (Cobb-Douglas preset)");
  f3->add_option("--out", out_dir, "output directory");
  f3->add_option("--grid", grid, "P in dB")->default_str("0:30:1");
  f3->add_option("--balance-cap", fig3.balance_cap_mhz, "balance cap in MHz")->capture_default_str();
  f3->add_option("--delta", fig3.delta, "discount factor")->capture_default_str();
  f3->add_option("--replications", fig3.replications, "simulate the dynamic column (0: stationary chain)")
      ->capture_default_str();
  f3->add_option("--seed", fig3.seed, "seed for simulated runs")->capture_default_str();

  Fig4Options fig4;
  auto* f4 = app.add_subcommand("fig4", "dynamic gain over full-spectrum sharing against the balance cap");
  f4->add_option("--out", out_dir, "output directory");
  f4->add_option("--grid", grid, "balance caps in MHz")->default_str("10:50:10");
  f4->add_option("--delta", fig4.delta, "discount factor")->capture_default_str();
  f4->add_flag("--uncertified", fig4.uncertified, "best Delta whether or not it is certified");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      SimulateOverrides o;
      if (*sim_seed) o.seed = seed;
      if (*sim_reps) o.replications = replications;
      return report(cmd_simulate(scenario, out_dir, o));
    }
    if (*ver) return report(cmd_verify(scenario, out_dir));
    if (*f2) return report(cmd_fig2(parse_grid(grid.empty() ? "10:500:10" : grid), out_dir));
    if (*f3) return report(cmd_fig3(parse_grid(grid.empty() ? "0:30:1" : grid), out_dir, fig3));
    if (*f4) return report(cmd_fig4(parse_grid(grid.empty() ? "10:50:10" : grid), out_dir, fig4));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
