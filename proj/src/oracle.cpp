#include "viscodyn/oracle.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

namespace viscodyn {

AugmentedLti build_augmented(const SdofProblem& problem) {
  problem.validate();
  const LoadSignal& load = problem.load;
  std::size_t carriers = 0;
  switch (load.kind()) {
    case LoadSignal::Kind::Step:
      carriers = 1;
      break;
    case LoadSignal::Kind::Harmonic:
      carriers = 2;
      break;
    case LoadSignal::Kind::Tabulated:
      throw UnsupportedLoadError(
          "tabulated loads have no autonomous representation; "
          "only step and harmonic loads can be solved exactly");
  }

  const std::size_t np = problem.chain.cell_count();
  const std::size_t n = 2 + np + carriers;
  AugmentedLti lti;
  lti.cell_count = np;
  lti.carrier_count = carriers;
  lti.system = Eigen::MatrixXd::Zero(n, n);
  lti.initial = Eigen::VectorXd::Zero(n);

  Eigen::MatrixXd& A = lti.system;
  const double m = problem.mass;
  const double kinf = problem.chain.long_term_stiffness();

  A(0, 1) = 1.0;         // r' = v
  A(1, 0) = -kinf / m;   // v' = (-k_inf r - sum f_p + F) / m
  for (std::size_t p = 0; p < np; ++p) {
    A(1, 2 + p) = -1.0 / m;
    const MaxwellCell& cell = problem.chain.cells()[p];
    A(2 + p, 1) = cell.stiffness;               // f_p' = k_p v - f_p / theta_p
    A(2 + p, 2 + p) = -1.0 / cell.relaxation_time;
  }

  const std::size_t c0 = 2 + np;
  if (load.kind() == LoadSignal::Kind::Step) {
    // Constant carrier c = 1; contributes amplitude * c to the force.
    A(1, c0) = load.amplitude() / m;
    lti.initial(c0) = 1.0;
  } else {
    // Rotating pair (s, c) with s' = omega c, c' = -omega s, s(0) = 0,
    // c(0) = 1, so s(t) = sin(omega t) carries the harmonic load.
    A(1, c0) = load.amplitude() / m;
    A(c0, c0 + 1) = load.omega();
    A(c0 + 1, c0) = -load.omega();
    lti.initial(c0 + 1) = 1.0;
  }

  lti.initial(0) = problem.r0;
  lti.initial(1) = problem.v0;
  for (std::size_t p = 0; p < problem.f0.size(); ++p) {
    lti.initial(2 + p) = problem.f0[p];
  }
  return lti;
}

Eigen::MatrixXd balanced_expm(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n) {
    throw std::invalid_argument("matrix exponential needs a square matrix");
  }
  Eigen::MatrixXd work = m;
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);

  // Iterative radix-2 balancing (the classic gebal sweep): scale row/column
  // pairs by powers of two until each row/column norm pair is within a factor
  // of two. Powers of two keep the transform exact in floating point.
  bool changed = true;
  int sweeps = 0;
  while (changed && sweeps++ < 100) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = work.col(i).cwiseAbs().sum() - std::abs(work(i, i));
      double r = work.row(i).cwiseAbs().sum() - std::abs(work(i, i));
      if (c == 0.0 || r == 0.0) continue;
      const double s = c + r;
      double f = 1.0;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        scale(i) *= f;
        work.row(i) /= f;
        work.col(i) *= f;
        changed = true;
      }
    }
  }

  Eigen::MatrixXd e = work.exp();
  // Undo the similarity: exp(m) = D exp(D^-1 m D) D^-1.
  for (Eigen::Index i = 0; i < n; ++i) e.row(i) *= scale(i);
  for (Eigen::Index j = 0; j < n; ++j) e.col(j) /= scale(j);
  return e;
}

Propagator::Propagator(const AugmentedLti& lti, double dt_out) : dt_out_(dt_out) {
  if (!(dt_out > 0.0) || !std::isfinite(dt_out)) {
    throw std::domain_error("output step must be positive and finite");
  }
  step_ = balanced_expm(lti.system * dt_out);
}

Trajectory solve_exact(const SdofProblem& problem, double dt_out, double t_max) {
  if (!(dt_out > 0.0) || !std::isfinite(dt_out)) {
    throw std::domain_error("output step must be positive and finite");
  }
  if (!(t_max >= dt_out)) {
    throw std::domain_error("t_max must cover at least one output step");
  }
  const AugmentedLti lti = build_augmented(problem);
  const Propagator prop(lti, dt_out);
  const auto steps = static_cast<std::size_t>(std::llround(t_max / dt_out));
  const std::size_t np = lti.cell_count;
  const double m = problem.mass;
  const double kinf = problem.chain.long_term_stiffness();

  std::vector<SdofState> states;
  states.reserve(steps + 1);
  Eigen::VectorXd x = lti.initial;
  for (std::size_t i = 0; i <= steps; ++i) {
    SdofState s;
    s.t = static_cast<double>(i) * dt_out;
    s.r = x(0);
    s.v = x(1);
    s.f.assign(x.data() + 2, x.data() + 2 + np);
    // Acceleration from force balance rather than finite differences.
    s.a = (problem.load(s.t) - kinf * s.r - s.cell_force_sum()) / m;
    states.push_back(std::move(s));
    if (i < steps) x = prop.advance(x);
  }
  return Trajectory(dt_out, std::move(states));
}

}  // namespace viscodyn
