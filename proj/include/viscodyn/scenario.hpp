#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace viscodyn {

enum class SolverKind { Newmark, Exact };

// A plain-text run description ("key = value" lines, '#' comments). Paths in
// the file are resolved relative to the file's own directory so bundled
// scenarios work from any working directory.
struct Scenario {
  enum class Kind { Sdof, Fem };

  Kind kind = Kind::Sdof;
  std::string name;        // output file stem; defaults to the file stem
  std::string chain_file;  // resolved path
  double stiffness_scale = 1.0;

  // time stepping
  double dt = 0.0;
  double t_max = 0.0;
  SolverKind solver = SolverKind::Newmark;
  std::vector<double> dt_list;  // converge / energy-report sweeps

  // load
  std::string load_kind = "step";  // step | harmonic | table
  double amplitude = 0.0;          // [N] (single mass) or profile scale (fem)
  double omega = 0.0;              // [rad/s]
  std::string load_table;          // resolved path, load_kind == table

  // single-mass parameters
  double mass = 0.0;  // [kg]
  double r0 = 0.0;
  double v0 = 0.0;

  // continuum parameters
  int grid[3] = {1, 1, 1};
  double box[3] = {1.0, 1.0, 1.0};
  double density = 0.0;
  double poisson = 0.3;
  std::string support = "fix-bottom";  // fix-bottom | patch-rollers
  std::string traction_face = "z+";    // x-, x+, y-, y+, z-, z+
  double traction[3] = {0.0, 0.0, 0.0};
  std::vector<std::array<int, 3>> probes;
  int snapshot_every = 0;

  void validate() const;
};

Scenario parse_scenario(std::istream& in, const std::string& origin,
                        const std::string& default_name,
                        const std::string& base_dir);
Scenario load_scenario_file(const std::string& path);

// Command-line overrides applied on top of the file.
struct ScenarioOverrides {
  std::optional<std::string> chain_file;
  std::optional<std::string> solver;
  std::optional<double> dt;
  std::optional<double> t_max;
  std::vector<double> dt_list;
};

void apply_overrides(Scenario& scenario, const ScenarioOverrides& overrides);

// Each command writes its CSV/VTK outputs under out_dir (created on demand),
// prints a human summary plus machine-readable "key = value" lines to `log`,
// and returns the paths it wrote.
struct RunPaths {
  std::vector<std::string> files;
};

RunPaths run_simulate_sdof(const Scenario& scenario, const std::string& out_dir,
                           std::ostream& log);
RunPaths run_simulate_fem(const Scenario& scenario, const std::string& out_dir,
                          std::ostream& log);
RunPaths run_converge(const Scenario& scenario, const std::string& out_dir,
                      std::ostream& log);
RunPaths run_energy_report(const Scenario& scenario, const std::string& out_dir,
                           std::ostream& log);

}  // namespace viscodyn
