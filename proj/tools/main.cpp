// Command-line front end: scenario files in, CSV/VTK artifacts out.

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "viscodyn/scenario.hpp"

namespace {

struct CommonArgs {
  std::string scenario_path;
  std::string out_dir = ".";
  viscodyn::ScenarioOverrides overrides;
  std::string chain;
  std::string solver;
  double dt = 0.0;
  double t_max = 0.0;
  std::vector<double> dt_list;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_solver,
                bool with_dt_list) {
  cmd->add_option("scenario", args.scenario_path, "scenario file (key = value)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--chain", args.chain, "override the chain file");
  cmd->add_option("--out", args.out_dir, "output directory (default: .)");
  if (with_solver) {
    cmd->add_option("--solver", args.solver, "newmark | exact")
        ->check(CLI::IsMember({"newmark", "exact"}));
  }
  if (with_dt_list) {
    cmd->add_option("--dt", args.dt_list, "step sizes for the sweep [s]");
  } else {
    cmd->add_option("--dt", args.dt, "step size [s]");
  }
  cmd->add_option("--tmax", args.t_max, "end time [s]");
}

viscodyn::Scenario load_with_overrides(const CommonArgs& args) {
  viscodyn::Scenario sc = viscodyn::load_scenario_file(args.scenario_path);
  viscodyn::ScenarioOverrides ov;
  if (!args.chain.empty()) ov.chain_file = args.chain;
  if (!args.solver.empty()) ov.solver = args.solver;
  if (args.dt > 0.0) ov.dt = args.dt;
  if (args.t_max > 0.0) ov.t_max = args.t_max;
  ov.dt_list = args.dt_list;
  viscodyn::apply_overrides(sc, ov);
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-chain viscoelastic dynamics: time integration, exact "
               "reference solutions, energy diagnostics, and a 3D continuum "
               "solver"};
  app.require_subcommand(1);

  CommonArgs sdof_args, fem_args, conv_args, energy_args;
  CLI::App* sim_sdof = app.add_subcommand(
      "simulate-sdof", "integrate a single-mass scenario and write CSVs");
  add_common(sim_sdof, sdof_args, /*with_solver=*/true, /*with_dt_list=*/false);

  CLI::App* sim_fem = app.add_subcommand(
      "simulate-fem", "run a continuum scenario; probes CSV plus VTK snapshots");
  add_common(sim_fem, fem_args, /*with_solver=*/false, /*with_dt_list=*/false);

  CLI::App* converge = app.add_subcommand(
      "converge", "dt sweep against the exact reference; prints observed orders");
  add_common(converge, conv_args, /*with_solver=*/false, /*with_dt_list=*/true);

  CLI::App* energy = app.add_subcommand(
      "energy-report", "energy-closure table over a dt sweep");
  add_common(energy, energy_args, /*with_solver=*/false, /*with_dt_list=*/true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_sdof->parsed()) {
      viscodyn::run_simulate_sdof(load_with_overrides(sdof_args),
                                  sdof_args.out_dir, std::cout);
    } else if (sim_fem->parsed()) {
      viscodyn::run_simulate_fem(load_with_overrides(fem_args), fem_args.out_dir,
                                 std::cout);
    } else if (converge->parsed()) {
      viscodyn::run_converge(load_with_overrides(conv_args), conv_args.out_dir,
                             std::cout);
    } else if (energy->parsed()) {
      viscodyn::run_energy_report(load_with_overrides(energy_args),
                                  energy_args.out_dir, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
