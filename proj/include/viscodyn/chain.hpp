#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace viscodyn {

// Thrown for malformed text inputs (chain files, scenario files, load tables).
// The message carries origin and line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One Maxwell cell: a spring k_p in series with a dashpot. The dashpot
// viscosity is eta_p = k_p * theta_p, so (k_p, theta_p) fixes the cell.
struct MaxwellCell {
  double stiffness = 0.0;        // k_p      [N/m] (or Pa as a modulus)
  double relaxation_time = 0.0;  // theta_p  [s]

  double viscosity() const { return stiffness * relaxation_time; }
};

// Generalized Maxwell chain: a long-term spring k_inf in parallel with P
// Maxwell cells. Stiffnesses are strictly positive; relaxation times may
// span many decades (the bundled material runs 1e-9 s to 1e12 s).
class MaxwellChain {
 public:
  MaxwellChain(double long_term_stiffness, std::vector<MaxwellCell> cells);

  double long_term_stiffness() const { return long_term_stiffness_; }
  const std::vector<MaxwellCell>& cells() const { return cells_; }
  std::size_t cell_count() const { return cells_.size(); }

  // k_0 = k_inf + sum_p k_p: response to an instantaneous deformation, before
  // any dashpot has moved.
  double instantaneous_stiffness() const;

  // Copy with every stiffness multiplied by `factor` (unit conversion, e.g.
  // a table given in kN/m becomes N/m with factor 1e3). Times are unchanged.
  MaxwellChain with_stiffness_scale(double factor) const;

 private:
  double long_term_stiffness_;
  std::vector<MaxwellCell> cells_;
};

// Per-cell recursion coefficients for a fixed step dt. They implement the
// exact (exponential) solution of each cell over one step under linearly
// interpolated acceleration:
//
//   f_{p,i+1} = decay_p f_{p,i} + k_p theta_hat_p v_i
//             + accel_weight_p (a_i + a_{i+1})
//
// with theta_hat_p = theta_p (1 - exp(-dt/theta_p)), decay_p = exp(-dt/theta_p)
// and accel_weight_p = eta_p (dt - theta_hat_p) / 2.
struct StepCoefficients {
  double dt = 0.0;
  std::vector<double> theta_hat;     // [s]
  std::vector<double> decay;         // dimensionless, in (0, 1]
  std::vector<double> accel_weight;  // [N s^2 / m]
  double accel_weight_sum = 0.0;
  double stiffness_theta_hat_sum = 0.0;  // sum_p k_p theta_hat_p  [N s / m]
};

// Evaluates the coefficients cancellation-safely across the whole dt/theta
// range (dt/theta from ~1e-12 up to ~1e+3 occurs with the bundled material).
// dt == 0 yields the identity update. Negative or non-finite dt is a domain
// error.
StepCoefficients step_coefficients(const MaxwellChain& chain, double dt);

// Chain file format: '#' starts a comment, blank lines are skipped, the first
// content line is "k_inf = <value>", every following line is "k_p, theta_p".
// `origin` names the stream in error messages.
MaxwellChain parse_chain(std::istream& in, const std::string& origin = "<stream>");
MaxwellChain load_chain_file(const std::string& path);

// Writes the same format back with full (round-trip exact) precision.
void serialize_chain(const MaxwellChain& chain, std::ostream& out);

}  // namespace viscodyn
