#pragma once

#include <cstddef>
#include <stdexcept>

#include <Eigen/Dense>

#include "viscodyn/sdof.hpp"

namespace viscodyn {

// Raised when a load shape has no autonomous linear representation
// (tabulated loads); the exact solver only covers step and harmonic runs.
class UnsupportedLoadError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// First-order form x' = A x of the oscillator with the load folded in as an
// autonomous carrier block, x = [r, v, f_1..f_P, carriers]:
//
//   r'   = v
//   v'   = (-k_inf r - sum_p f_p + F) / m
//   f_p' = k_p v - f_p / theta_p
//
// A step load contributes one constant carrier (c' = 0, c(0) = 1,
// F = amplitude * c); a harmonic load a rotating pair s' = omega c,
// c' = -omega s with s(0) = 0, c(0) = 1 and F = amplitude * s. The exact
// trajectory is then a plain matrix exponential of A.
struct AugmentedLti {
  Eigen::MatrixXd system;
  Eigen::VectorXd initial;
  std::size_t cell_count = 0;
  std::size_t carrier_count = 0;

  std::size_t size() const { return 2 + cell_count + carrier_count; }
};

AugmentedLti build_augmented(const SdofProblem& problem);

// exp(m) computed as D exp(D^-1 m D) D^-1 with an iterative radix-2
// balancing pass choosing D (powers of two only, so the similarity transform
// is exact in floating point). Balancing cuts the scaling-and-squaring depth
// when off-diagonal scale disparity drives the norm. With the bundled
// material the norm is pinned by the -1/theta diagonal instead (theta_min =
// 1e-9 s), which no similarity scaling can shrink, so the pass is a cheap
// no-op there; it stays because arbitrary chains do profit from it.
Eigen::MatrixXd balanced_expm(const Eigen::MatrixXd& m);

// One-output-step propagator x_{i+1} = E x_i with E = exp(A dt_out).
class Propagator {
 public:
  Propagator(const AugmentedLti& lti, double dt_out);

  double dt_out() const { return dt_out_; }
  const Eigen::MatrixXd& matrix() const { return step_; }
  Eigen::VectorXd advance(const Eigen::VectorXd& x) const { return step_ * x; }

 private:
  double dt_out_;
  Eigen::MatrixXd step_;
};

// Samples the exact solution on the same uniform grid the time stepper uses.
// Accelerations are reconstructed from force balance, so every returned node
// satisfies m a + k_inf r + sum_p f_p = F(t) to round-off.
Trajectory solve_exact(const SdofProblem& problem, double dt_out, double t_max);

}  // namespace viscodyn
