#include "viscodyn/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace viscodyn {

EnergyLedger compute_ledger(std::span<const SdofState> states,
                            const SdofProblem& problem) {
  problem.validate();
  const MaxwellChain& chain = problem.chain;
  const std::size_t np = chain.cell_count();
  const std::size_t n = states.size();
  if (n == 0) {
    throw std::invalid_argument("energy ledger needs at least one node");
  }

  EnergyLedger ledger;
  ledger.internal.resize(n);
  ledger.dissipated.resize(n);
  ledger.external_work.resize(n);
  ledger.imbalance.resize(n);

  const double m = problem.mass;
  const double kinf = chain.long_term_stiffness();

  auto internal_energy = [&](const SdofState& s) {
    if (s.f.size() != np) {
      throw std::invalid_argument("state cell count does not match the chain");
    }
    double e = 0.5 * m * s.v * s.v + 0.5 * kinf * s.r * s.r;
    for (std::size_t p = 0; p < np; ++p) {
      // Energy stored in the cell spring: the spring force equals the cell
      // force, so its elongation is f_p / k_p.
      e += s.f[p] * s.f[p] / (2.0 * chain.cells()[p].stiffness);
    }
    return e;
  };
  auto dissipation_rate = [&](const SdofState& s) {
    double d = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      // The dashpot carries the cell force; its velocity is f_p / eta_p.
      d += s.f[p] * s.f[p] / chain.cells()[p].viscosity();
    }
    return d;
  };

  double dissipated = 0.0;
  double work = 0.0;
  double rate_prev = dissipation_rate(states[0]);
  double power_prev = problem.load(states[0].t) * states[0].v;
  ledger.internal[0] = internal_energy(states[0]);
  ledger.dissipated[0] = 0.0;
  ledger.external_work[0] = 0.0;
  ledger.imbalance[0] = 0.0;

  for (std::size_t i = 1; i < n; ++i) {
    const double h = states[i].t - states[i - 1].t;
    if (h < 0.0) {
      throw std::invalid_argument("state times must be non-decreasing");
    }
    const double rate = dissipation_rate(states[i]);
    const double power = problem.load(states[i].t) * states[i].v;
    dissipated += 0.5 * h * (rate_prev + rate);
    work += 0.5 * h * (power_prev + power);
    rate_prev = rate;
    power_prev = power;

    ledger.internal[i] = internal_energy(states[i]);
    ledger.dissipated[i] = dissipated;
    ledger.external_work[i] = work;
    ledger.imbalance[i] =
        std::abs(ledger.internal[i] + dissipated - ledger.internal[0] - work);
  }
  return ledger;
}

EnergyLedger compute_ledger(const Trajectory& trajectory,
                            const SdofProblem& problem) {
  return compute_ledger(std::span<const SdofState>(trajectory.states()), problem);
}

std::vector<DissipationRow> dissipation_report(const SdofProblem& problem,
                                               const std::vector<double>& dts,
                                               double t_max) {
  std::vector<DissipationRow> rows;
  rows.reserve(dts.size());
  for (double dt : dts) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
      throw std::domain_error("report step sizes must be positive and finite");
    }
    const double steps = t_max / dt;
    if (std::abs(steps - std::round(steps)) > 1e-8 * steps) {
      throw std::domain_error("every report step size must divide t_max");
    }
    const Trajectory traj = integrate(problem, dt, t_max);
    const EnergyLedger ledger = compute_ledger(traj, problem);

    DissipationRow row;
    row.dt = dt;
    const double total_work = ledger.external_work.back();
    row.work_defined = total_work != 0.0;
    if (row.work_defined) {
      double worst = 0.0;
      for (double delta : ledger.imbalance) worst = std::max(worst, delta);
      row.imbalance_ratio = worst / total_work;
      row.dissipated_over_work = ledger.dissipated.back() / total_work;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace viscodyn
