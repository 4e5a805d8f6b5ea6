#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "viscodyn/chain.hpp"
#include "viscodyn/load.hpp"

namespace viscodyn {

// State of the single-mass oscillator at one time node.
struct SdofState {
  double t = 0.0;
  double r = 0.0;         // displacement  [m]
  double v = 0.0;         // velocity      [m/s]
  double a = 0.0;         // acceleration  [m/s^2]
  std::vector<double> f;  // one force per Maxwell cell  [N]

  double cell_force_sum() const;
};

// Complete description of a single-mass run: mass on a Maxwell chain under a
// scalar load, starting from (r0, v0) and optional nonzero cell forces.
struct SdofProblem {
  double mass = 0.0;  // [kg]
  MaxwellChain chain;
  LoadSignal load;
  double r0 = 0.0;
  double v0 = 0.0;
  std::vector<double> f0;  // empty means all cells start relaxed

  void validate() const;
  // Initial node with the acceleration filled in from force balance.
  SdofState initial_state() const;
};

// a_0 = (F(0) - k_inf r_0 - sum_p f_{p,0}) / m: dynamic equilibrium at t = 0.
double initial_acceleration(const SdofProblem& problem);

// One average-acceleration step (trapezoidal Newmark, gamma = 1/2,
// beta = 1/4) combined with the exact per-cell force recursion. The linear
// solve is scalar:
//
//   (m + k_inf dt^2/4 + sum_p accel_weight_p) a_{i+1} =
//       F(t_{i+1}) - sum_p decay_p f_{p,i} - k_inf r_i
//       - (k_inf dt + sum_p k_p theta_hat_p) v_i
//       - (k_inf dt^2/4 + sum_p accel_weight_p) a_i
//
// then v and r follow the trapezoidal update and the cell forces the
// recursion documented with StepCoefficients.
SdofState newmark_step(const SdofState& state, const StepCoefficients& coeffs,
                       const SdofProblem& problem);

// Raised when a state turns non-finite mid-run (overflow or NaN); knows the
// step index that produced it.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(std::size_t step_index, const std::string& what);
  std::size_t step_index() const { return step_index_; }

 private:
  std::size_t step_index_;
};

// Uniformly sampled trajectory; states()[i] sits at t = i * dt.
class Trajectory {
 public:
  Trajectory(double dt, std::vector<SdofState> states);

  double dt() const { return dt_; }
  std::size_t node_count() const { return states_.size(); }
  const SdofState& operator[](std::size_t i) const { return states_[i]; }
  const SdofState& back() const { return states_.back(); }
  const std::vector<SdofState>& states() const { return states_; }

 private:
  double dt_;
  std::vector<SdofState> states_;
};

// Integrates round(t_max / dt) steps from the problem's initial state.
// Requires dt > 0 and t_max >= dt.
Trajectory integrate(const SdofProblem& problem, double dt, double t_max);

}  // namespace viscodyn
