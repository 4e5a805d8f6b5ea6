#include "viscodyn/sdof.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace viscodyn {

namespace {

bool finite_state(const SdofState& s) {
  if (!std::isfinite(s.r) || !std::isfinite(s.v) || !std::isfinite(s.a)) {
    return false;
  }
  for (double fp : s.f) {
    if (!std::isfinite(fp)) return false;
  }
  return true;
}

[[noreturn]] void throw_nonfinite(std::size_t step, const SdofState& s) {
  std::ostringstream msg;
  msg << "non-finite state at step " << step << " (t = " << s.t
      << "): r = " << s.r << ", v = " << s.v << ", a = " << s.a;
  throw IntegrationError(step, msg.str());
}

}  // namespace

double SdofState::cell_force_sum() const {
  double sum = 0.0;
  for (double fp : f) sum += fp;
  return sum;
}

void SdofProblem::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw std::invalid_argument("mass must be positive and finite");
  }
  if (!std::isfinite(r0) || !std::isfinite(v0)) {
    throw std::invalid_argument("initial displacement/velocity must be finite");
  }
  if (!f0.empty() && f0.size() != chain.cell_count()) {
    throw std::invalid_argument("initial cell forces must match the chain size (" +
                                std::to_string(chain.cell_count()) + " cells, got " +
                                std::to_string(f0.size()) + ")");
  }
  for (double fp : f0) {
    if (!std::isfinite(fp)) {
      throw std::invalid_argument("initial cell forces must be finite");
    }
  }
}

SdofState SdofProblem::initial_state() const {
  validate();
  SdofState s;
  s.t = 0.0;
  s.r = r0;
  s.v = v0;
  s.f = f0.empty() ? std::vector<double>(chain.cell_count(), 0.0) : f0;
  s.a = (load(0.0) - chain.long_term_stiffness() * r0 - s.cell_force_sum()) / mass;
  return s;
}

double initial_acceleration(const SdofProblem& problem) {
  return problem.initial_state().a;
}

SdofState newmark_step(const SdofState& state, const StepCoefficients& coeffs,
                       const SdofProblem& problem) {
  const MaxwellChain& chain = problem.chain;
  const std::size_t n = chain.cell_count();
  if (state.f.size() != n || coeffs.decay.size() != n) {
    throw std::invalid_argument("state/coefficients/chain cell counts disagree");
  }
  const double dt = coeffs.dt;
  const double kinf = chain.long_term_stiffness();

  double decayed = 0.0;  // sum_p decay_p f_{p,i}
  for (std::size_t p = 0; p < n; ++p) decayed += coeffs.decay[p] * state.f[p];

  const double quarter_dt2 = 0.25 * dt * dt;
  const double effective_mass =
      problem.mass + kinf * quarter_dt2 + coeffs.accel_weight_sum;
  const double rhs = problem.load(state.t + dt) - decayed - kinf * state.r -
                     (kinf * dt + coeffs.stiffness_theta_hat_sum) * state.v -
                     (kinf * quarter_dt2 + coeffs.accel_weight_sum) * state.a;

  SdofState next;
  next.t = state.t + dt;
  next.a = rhs / effective_mass;
  next.v = state.v + 0.5 * dt * (state.a + next.a);
  next.r = state.r + dt * state.v + quarter_dt2 * (state.a + next.a);
  next.f.resize(n);
  const double accel_sum = state.a + next.a;
  for (std::size_t p = 0; p < n; ++p) {
    next.f[p] = coeffs.decay[p] * state.f[p] +
                chain.cells()[p].stiffness * coeffs.theta_hat[p] * state.v +
                coeffs.accel_weight[p] * accel_sum;
  }
  return next;
}

IntegrationError::IntegrationError(std::size_t step_index, const std::string& what)
    : std::runtime_error(what), step_index_(step_index) {}

Trajectory::Trajectory(double dt, std::vector<SdofState> states)
    : dt_(dt), states_(std::move(states)) {
  if (states_.empty()) {
    throw std::invalid_argument("trajectory needs at least one node");
  }
}

Trajectory integrate(const SdofProblem& problem, double dt, double t_max) {
  problem.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::domain_error("step size must be positive and finite");
  }
  if (!(t_max >= dt)) {
    throw std::domain_error("t_max must cover at least one step");
  }
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt));
  const StepCoefficients coeffs = step_coefficients(problem.chain, dt);

  std::vector<SdofState> states;
  states.reserve(steps + 1);
  states.push_back(problem.initial_state());
  if (!finite_state(states.back())) throw_nonfinite(0, states.back());
  for (std::size_t i = 0; i < steps; ++i) {
    states.push_back(newmark_step(states.back(), coeffs, problem));
    // Keep node times exactly on the uniform grid; the accumulated t from
    // the step itself can drift by a few ulp for non-binary dt.
    states.back().t = static_cast<double>(i + 1) * dt;
    if (!finite_state(states.back())) throw_nonfinite(i + 1, states.back());
  }
  return Trajectory(dt, std::move(states));
}

}  // namespace viscodyn
