#include "viscodyn/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string_view>

#include "viscodyn/csv.hpp"
#include "viscodyn/energy.hpp"
#include "viscodyn/fem3d.hpp"
#include "viscodyn/oracle.hpp"
#include "viscodyn/sdof.hpp"

namespace viscodyn {

namespace {

namespace fs = std::filesystem;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

bool parse_int(std::string_view text, int& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

std::vector<std::string_view> split_fields(std::string_view value) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < value.size()) {
    while (pos < value.size() && std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
    std::size_t start = pos;
    while (pos < value.size() && !std::isspace(static_cast<unsigned char>(value[pos]))) ++pos;
    if (pos > start) out.push_back(value.substr(start, pos - start));
  }
  return out;
}

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

std::string resolve(const std::string& base_dir, std::string_view path) {
  fs::path p{std::string(path)};
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

}  // namespace

void Scenario::validate() const {
  if (chain_file.empty()) {
    throw std::invalid_argument("scenario is missing the chain file");
  }
  if (load_kind != "step" && load_kind != "harmonic" && load_kind != "table") {
    throw std::invalid_argument("unknown load kind '" + load_kind + "'");
  }
  if (load_kind == "table" && load_table.empty()) {
    throw std::invalid_argument("tabulated load needs a load_table file");
  }
  if (kind == Kind::Fem) {
    if (support != "fix-bottom" && support != "patch-rollers") {
      throw std::invalid_argument("unknown support '" + support + "'");
    }
    if (solver == SolverKind::Exact) {
      throw std::invalid_argument("the exact solver only covers single-mass runs");
    }
  }
}

Scenario parse_scenario(std::istream& in, const std::string& origin,
                        const std::string& default_name,
                        const std::string& base_dir) {
  Scenario sc;
  sc.name = default_name;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line(raw);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail(origin, lineno, "expected 'key = value'");
    }
    const std::string key{trim(line.substr(0, eq))};
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) fail(origin, lineno, "empty value for '" + key + "'");

    auto want_double = [&](double& out) {
      if (!parse_double(value, out)) {
        fail(origin, lineno, "cannot parse number for '" + key + "'");
      }
    };
    auto want_int = [&](int& out) {
      if (!parse_int(value, out)) {
        fail(origin, lineno, "cannot parse integer for '" + key + "'");
      }
    };

    if (key == "kind") {
      if (value == "sdof") sc.kind = Scenario::Kind::Sdof;
      else if (value == "fem") sc.kind = Scenario::Kind::Fem;
      else fail(origin, lineno, "kind must be 'sdof' or 'fem'");
    } else if (key == "name") {
      sc.name = std::string(value);
    } else if (key == "chain") {
      sc.chain_file = resolve(base_dir, value);
    } else if (key == "stiffness_scale") {
      want_double(sc.stiffness_scale);
    } else if (key == "dt_s") {
      want_double(sc.dt);
    } else if (key == "t_max_s") {
      want_double(sc.t_max);
    } else if (key == "dt_list_s") {
      sc.dt_list.clear();
      for (auto field : split_fields(value)) {
        double dt = 0.0;
        if (!parse_double(field, dt)) {
          fail(origin, lineno, "cannot parse dt_list_s entry");
        }
        sc.dt_list.push_back(dt);
      }
    } else if (key == "solver") {
      if (value == "newmark") sc.solver = SolverKind::Newmark;
      else if (value == "exact") sc.solver = SolverKind::Exact;
      else fail(origin, lineno, "solver must be 'newmark' or 'exact'");
    } else if (key == "load") {
      sc.load_kind = std::string(value);
    } else if (key == "amplitude_n") {
      want_double(sc.amplitude);
    } else if (key == "omega_rad_s") {
      want_double(sc.omega);
    } else if (key == "load_table") {
      sc.load_table = resolve(base_dir, value);
    } else if (key == "mass_kg") {
      want_double(sc.mass);
    } else if (key == "r0_m") {
      want_double(sc.r0);
    } else if (key == "v0_m_s") {
      want_double(sc.v0);
    } else if (key == "grid") {
      auto fields = split_fields(value);
      if (fields.size() != 3 || !parse_int(fields[0], sc.grid[0]) ||
          !parse_int(fields[1], sc.grid[1]) || !parse_int(fields[2], sc.grid[2])) {
        fail(origin, lineno, "grid needs three integers 'nx ny nz'");
      }
    } else if (key == "box_m") {
      auto fields = split_fields(value);
      if (fields.size() != 3 || !parse_double(fields[0], sc.box[0]) ||
          !parse_double(fields[1], sc.box[1]) || !parse_double(fields[2], sc.box[2])) {
        fail(origin, lineno, "box_m needs three numbers 'lx ly lz'");
      }
    } else if (key == "density_kg_m3") {
      want_double(sc.density);
    } else if (key == "poisson") {
      want_double(sc.poisson);
    } else if (key == "support") {
      sc.support = std::string(value);
    } else if (key == "traction_face") {
      sc.traction_face = std::string(value);
    } else if (key == "traction_pa") {
      auto fields = split_fields(value);
      if (fields.size() != 3 || !parse_double(fields[0], sc.traction[0]) ||
          !parse_double(fields[1], sc.traction[1]) ||
          !parse_double(fields[2], sc.traction[2])) {
        fail(origin, lineno, "traction_pa needs three numbers 'tx ty tz'");
      }
    } else if (key == "probe") {
      auto fields = split_fields(value);
      std::array<int, 3> node{};
      if (fields.size() != 3 || !parse_int(fields[0], node[0]) ||
          !parse_int(fields[1], node[1]) || !parse_int(fields[2], node[2])) {
        fail(origin, lineno, "probe needs three integers 'i j k'");
      }
      sc.probes.push_back(node);
    } else if (key == "snapshot_every") {
      want_int(sc.snapshot_every);
    } else {
      fail(origin, lineno, "unknown key '" + key + "'");
    }
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open scenario file");
  }
  const fs::path p(path);
  return parse_scenario(in, path, p.stem().string(), p.parent_path().string());
}

void apply_overrides(Scenario& scenario, const ScenarioOverrides& overrides) {
  if (overrides.chain_file) scenario.chain_file = *overrides.chain_file;
  if (overrides.solver) {
    if (*overrides.solver == "newmark") scenario.solver = SolverKind::Newmark;
    else if (*overrides.solver == "exact") scenario.solver = SolverKind::Exact;
    else throw std::invalid_argument("solver must be 'newmark' or 'exact'");
  }
  if (overrides.dt) scenario.dt = *overrides.dt;
  if (overrides.t_max) scenario.t_max = *overrides.t_max;
  if (!overrides.dt_list.empty()) scenario.dt_list = overrides.dt_list;
}

namespace {

LoadSignal make_load(const Scenario& sc) {
  if (sc.load_kind == "step") return LoadSignal::step(sc.amplitude);
  if (sc.load_kind == "harmonic") return LoadSignal::harmonic(sc.amplitude, sc.omega);
  std::ifstream in(sc.load_table);
  if (!in) {
    throw ParseError(sc.load_table + ": cannot open load table");
  }
  return LoadSignal::tabulated(read_load_table(in, sc.load_table));
}

SdofProblem make_sdof_problem(const Scenario& sc) {
  if (!(sc.mass > 0.0)) {
    throw std::invalid_argument("scenario needs mass_kg > 0");
  }
  MaxwellChain chain =
      load_chain_file(sc.chain_file).with_stiffness_scale(sc.stiffness_scale);
  return SdofProblem{.mass = sc.mass,
                     .chain = std::move(chain),
                     .load = make_load(sc),
                     .r0 = sc.r0,
                     .v0 = sc.v0,
                     .f0 = {}};
}

Face parse_face(const std::string& token) {
  if (token == "x-") return Face::XMin;
  if (token == "x+") return Face::XMax;
  if (token == "y-") return Face::YMin;
  if (token == "y+") return Face::YMax;
  if (token == "z-") return Face::ZMin;
  if (token == "z+") return Face::ZMax;
  throw std::invalid_argument("unknown traction face '" + token +
                              "' (use x-, x+, y-, y+, z-, z+)");
}

FemModel make_fem_model(const Scenario& sc) {
  MaxwellChain chain =
      load_chain_file(sc.chain_file).with_stiffness_scale(sc.stiffness_scale);
  LoadSignal profile = sc.load_kind == "harmonic"
                           ? LoadSignal::harmonic(1.0, sc.omega)
                           : LoadSignal::step(1.0);
  if (sc.load_kind == "table") {
    throw std::invalid_argument("continuum runs support step and harmonic loads");
  }
  return FemModel{.nx = sc.grid[0],
                  .ny = sc.grid[1],
                  .nz = sc.grid[2],
                  .lx = sc.box[0],
                  .ly = sc.box[1],
                  .lz = sc.box[2],
                  .density = sc.density,
                  .poisson = sc.poisson,
                  .chain = std::move(chain),
                  .support = sc.support == "fix-bottom" ? Support::FixBottom
                                                        : Support::PatchRollers,
                  .traction_face = parse_face(sc.traction_face),
                  .traction = Eigen::Vector3d(sc.traction[0], sc.traction[1],
                                              sc.traction[2]),
                  .load = std::move(profile)};
}

std::string output_path(const std::string& out_dir, const std::string& name,
                        const std::string& suffix) {
  fs::create_directories(out_dir);
  return (fs::path(out_dir) / (name + suffix)).string();
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  return out;
}

void require_steps(const Scenario& sc) {
  if (!(sc.dt > 0.0)) {
    throw std::invalid_argument("scenario needs dt_s > 0 (file key or --dt)");
  }
  if (!(sc.t_max >= sc.dt)) {
    throw std::invalid_argument("scenario needs t_max_s >= dt_s (file key or --tmax)");
  }
}

}  // namespace

RunPaths run_simulate_sdof(const Scenario& sc, const std::string& out_dir,
                           std::ostream& log) {
  sc.validate();
  require_steps(sc);
  const SdofProblem problem = make_sdof_problem(sc);
  const Trajectory traj = sc.solver == SolverKind::Exact
                              ? solve_exact(problem, sc.dt, sc.t_max)
                              : integrate(problem, sc.dt, sc.t_max);
  const EnergyLedger ledger = compute_ledger(traj, problem);

  RunPaths paths;
  const std::string traj_path = output_path(out_dir, sc.name, "_trajectory.csv");
  {
    auto out = open_output(traj_path);
    write_trajectory_csv(out, traj);
  }
  const std::string energy_path = output_path(out_dir, sc.name, "_energy.csv");
  {
    auto out = open_output(energy_path);
    write_energy_csv(out, traj, ledger);
  }
  paths.files = {traj_path, energy_path};

  const SdofState& last = traj.back();
  const double total_work = ledger.external_work.back();
  double worst = 0.0;
  for (double delta : ledger.imbalance) worst = std::max(worst, delta);

  log << "command = simulate-sdof\n";
  log << "scenario = " << sc.name << "\n";
  log << "solver = " << (sc.solver == SolverKind::Exact ? "exact" : "newmark") << "\n";
  log << "cells = " << problem.chain.cell_count() << "\n";
  log << "dt_s = " << full_precision(sc.dt) << "\n";
  log << "nodes = " << traj.node_count() << "\n";
  log << "final_t_s = " << full_precision(last.t) << "\n";
  log << "final_r_m = " << full_precision(last.r) << "\n";
  log << "final_v_m_s = " << full_precision(last.v) << "\n";
  log << "final_a_m_s2 = " << full_precision(last.a) << "\n";
  log << "internal_energy_J = " << full_precision(ledger.internal.back()) << "\n";
  log << "dissipated_J = " << full_precision(ledger.dissipated.back()) << "\n";
  log << "external_work_J = " << full_precision(total_work) << "\n";
  if (total_work != 0.0) {
    log << "max_delta_ratio = " << full_precision(worst / total_work) << "\n";
    log << "D_over_W = " << full_precision(ledger.dissipated.back() / total_work)
        << "\n";
  } else {
    log << "work_defined = false\n";
  }
  log << "trajectory_csv = " << traj_path << "\n";
  log << "energy_csv = " << energy_path << "\n";
  return paths;
}

RunPaths run_converge(const Scenario& sc, const std::string& out_dir,
                      std::ostream& log) {
  sc.validate();
  if (sc.dt_list.empty()) {
    throw std::invalid_argument("converge needs dt_list_s (file key or --dt)");
  }
  if (!(sc.t_max > 0.0)) {
    throw std::invalid_argument("converge needs t_max_s > 0");
  }
  const SdofProblem problem = make_sdof_problem(sc);

  log << "command = converge\n";
  log << "scenario = " << sc.name << "\n";
  log << "t_max_s = " << full_precision(sc.t_max) << "\n";

  std::vector<double> errors;
  for (double dt : sc.dt_list) {
    const Trajectory numeric = integrate(problem, dt, sc.t_max);
    const Trajectory exact = solve_exact(problem, dt, sc.t_max);
    double scale = 0.0;
    for (const SdofState& s : exact.states()) scale = std::max(scale, std::abs(s.r));
    double worst = 0.0;
    for (std::size_t i = 0; i < numeric.node_count(); ++i) {
      worst = std::max(worst, std::abs(numeric[i].r - exact[i].r));
    }
    errors.push_back(scale > 0.0 ? worst / scale : worst);
  }

  for (std::size_t i = 0; i < sc.dt_list.size(); ++i) {
    log << "dt_s = " << full_precision(sc.dt_list[i])
        << "  max_rel_err = " << full_precision(errors[i]);
    if (i > 0 && errors[i] > 0.0 && errors[i - 1] > 0.0) {
      const double order = std::log(errors[i - 1] / errors[i]) /
                           std::log(sc.dt_list[i - 1] / sc.dt_list[i]);
      log << "  pair_order = " << full_precision(order);
    }
    log << "\n";
  }

  // Least-squares slope of log(err) against log(dt) across the whole sweep.
  if (sc.dt_list.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < sc.dt_list.size(); ++i) {
      if (!(errors[i] > 0.0)) continue;
      const double x = std::log(sc.dt_list[i]);
      const double y = std::log(errors[i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
    if (n >= 2) {
      const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      log << "observed_order_lsq = " << full_precision(slope) << "\n";
    }
  }

  const auto rows = dissipation_report(problem, sc.dt_list, sc.t_max);
  const std::string report_path = output_path(out_dir, sc.name, "_report.csv");
  {
    auto out = open_output(report_path);
    write_report_csv(out, rows);
  }
  log << "report_csv = " << report_path << "\n";
  RunPaths paths;
  paths.files = {report_path};
  return paths;
}

RunPaths run_energy_report(const Scenario& sc, const std::string& out_dir,
                           std::ostream& log) {
  sc.validate();
  if (sc.dt_list.empty()) {
    throw std::invalid_argument("energy-report needs dt_list_s (file key or --dt)");
  }
  if (!(sc.t_max > 0.0)) {
    throw std::invalid_argument("energy-report needs t_max_s > 0");
  }
  const SdofProblem problem = make_sdof_problem(sc);
  const auto rows = dissipation_report(problem, sc.dt_list, sc.t_max);

  log << "command = energy-report\n";
  log << "scenario = " << sc.name << "\n";
  log << "t_max_s = " << full_precision(sc.t_max) << "\n";
  for (const DissipationRow& row : rows) {
    log << "dt_s = " << full_precision(row.dt)
        << "  delta_ratio = " << full_precision(row.imbalance_ratio)
        << "  D_over_W = " << full_precision(row.dissipated_over_work);
    if (!row.work_defined) log << "  work_defined = false";
    log << "\n";
  }

  const std::string report_path = output_path(out_dir, sc.name, "_report.csv");
  {
    auto out = open_output(report_path);
    write_report_csv(out, rows);
  }
  log << "report_csv = " << report_path << "\n";
  RunPaths paths;
  paths.files = {report_path};
  return paths;
}

RunPaths run_simulate_fem(const Scenario& sc, const std::string& out_dir,
                          std::ostream& log) {
  sc.validate();
  require_steps(sc);
  const FemModel model = make_fem_model(sc);

  std::vector<std::array<int, 3>> probes = sc.probes;
  if (probes.empty()) {
    // Default probe: center of the top face.
    probes.push_back({model.nx / 2, model.ny / 2, model.nz});
  }

  RunPaths paths;
  std::vector<std::string> snapshot_paths;
  auto on_snapshot = [&](const FemIntegrator& integ, std::size_t step) {
    std::ostringstream name;
    name << "_step" << std::setfill('0') << std::setw(6) << step << ".vtk";
    const std::string path = output_path(out_dir, sc.name, name.str());
    auto out = open_output(path);
    write_vtk_snapshot(integ.model(), integ.state(), out);
    snapshot_paths.push_back(path);
  };

  const FemRunResult result = run_fem(model, sc.dt, sc.t_max, probes,
                                      sc.snapshot_every, on_snapshot);

  const std::string probes_path = output_path(out_dir, sc.name, "_probes.csv");
  {
    auto out = open_output(probes_path);
    out << "t";
    for (const ProbeSeries& series : result.probes) {
      const auto& [i, j, k] = series.node;
      out << ",ux_" << i << "_" << j << "_" << k << ",uy_" << i << "_" << j
          << "_" << k << ",uz_" << i << "_" << j << "_" << k;
    }
    out << "\n";
    for (std::size_t row = 0; row < result.times.size(); ++row) {
      out << full_precision(result.times[row]);
      for (const ProbeSeries& series : result.probes) {
        out << ',' << full_precision(series.u[row][0]) << ','
            << full_precision(series.u[row][1]) << ','
            << full_precision(series.u[row][2]);
      }
      out << "\n";
    }
  }
  paths.files.push_back(probes_path);
  for (const std::string& p : snapshot_paths) paths.files.push_back(p);

  log << "command = simulate-fem\n";
  log << "scenario = " << sc.name << "\n";
  log << "grid = " << model.nx << " " << model.ny << " " << model.nz << "\n";
  log << "elements = " << model.element_count() << "\n";
  log << "nodes = " << model.node_count() << "\n";
  log << "dofs = " << model.dof_count() << "\n";
  log << "cells = " << model.chain.cell_count() << "\n";
  log << "dt_s = " << full_precision(sc.dt) << "\n";
  log << "time_nodes = " << result.times.size() << "\n";
  log << "final_t_s = " << full_precision(result.times.back()) << "\n";
  for (const ProbeSeries& series : result.probes) {
    const auto& [i, j, k] = series.node;
    const auto& u = series.u.back();
    log << "final_u_" << i << "_" << j << "_" << k << "_m = "
        << full_precision(u[0]) << " " << full_precision(u[1]) << " "
        << full_precision(u[2]) << "\n";
  }
  log << "probes_csv = " << probes_path << "\n";
  log << "snapshots = " << snapshot_paths.size() << "\n";
  return paths;
}

}  // namespace viscodyn
