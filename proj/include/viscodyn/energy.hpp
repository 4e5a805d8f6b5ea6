#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "viscodyn/sdof.hpp"

namespace viscodyn {

// Energy bookkeeping sampled at the trajectory nodes (all values in J):
//
//   internal_i   = 1/2 m v^2 + 1/2 k_inf r^2 + sum_p f_p^2 / (2 k_p)
//   dissipated_i = trapezoid up to t_i of sum_p f_p^2 / eta_p
//   work_i       = trapezoid up to t_i of F(t) v
//   imbalance_i  = |internal_i + dissipated_i - internal_0 - work_i|
//
// For the exact trajectory the imbalance vanishes as the sampling is refined;
// for the time stepper it is an O(dt^2) diagnostic of the discretization.
struct EnergyLedger {
  std::vector<double> internal;
  std::vector<double> dissipated;
  std::vector<double> external_work;
  std::vector<double> imbalance;

  std::size_t node_count() const { return internal.size(); }
};

// Quadrature intervals come from the state times themselves, so appending a
// duplicate node at an unchanged time contributes exactly zero.
EnergyLedger compute_ledger(std::span<const SdofState> states,
                            const SdofProblem& problem);
EnergyLedger compute_ledger(const Trajectory& trajectory,
                            const SdofProblem& problem);

struct DissipationRow {
  double dt = 0.0;
  // max_i imbalance_i / external_work_N; zero (and flagged) when no work was
  // done over the whole run.
  double imbalance_ratio = 0.0;
  double dissipated_over_work = 0.0;
  bool work_defined = true;
};

// One Newmark run per dt; every dt must divide t_max to within round-off.
std::vector<DissipationRow> dissipation_report(const SdofProblem& problem,
                                               const std::vector<double>& dts,
                                               double t_max);

}  // namespace viscodyn
