#include "viscodyn/chain.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <utility>

#include "viscodyn/csv.hpp"

namespace viscodyn {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Drops a trailing '#' comment, then surrounding whitespace.
std::string_view strip(std::string_view s) {
  if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
  return trim(s);
}

bool parse_double(std::string_view text, double& out) {
  // from_chars is locale-independent and rejects trailing garbage.
  const char* first = text.data();
  const char* last = first + text.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

// g(x) = x - 1 + exp(-x), the factor behind dt - theta_hat. The three terms
// cancel to O(x^2) for small x, so direct evaluation keeps no digits once
// x <~ 1e-8; below x = 1e-3 the Taylor series is exact to ~3e-15 relative.
double decay_remainder(double x) {
  if (x < 1e-3) {
    return x * x * (0.5 + x * (-1.0 / 6.0 + x * (1.0 / 24.0 - x / 120.0)));
  }
  return x - 1.0 + std::exp(-x);
}

}  // namespace

MaxwellChain::MaxwellChain(double long_term_stiffness, std::vector<MaxwellCell> cells)
    : long_term_stiffness_(long_term_stiffness), cells_(std::move(cells)) {
  if (!(long_term_stiffness_ > 0.0) || !std::isfinite(long_term_stiffness_)) {
    throw std::invalid_argument("long-term stiffness must be positive and finite");
  }
  for (std::size_t p = 0; p < cells_.size(); ++p) {
    const MaxwellCell& c = cells_[p];
    if (!(c.stiffness > 0.0) || !std::isfinite(c.stiffness)) {
      throw std::invalid_argument("cell " + std::to_string(p) +
                                  ": stiffness must be positive and finite");
    }
    if (!(c.relaxation_time > 0.0) || !std::isfinite(c.relaxation_time)) {
      throw std::invalid_argument("cell " + std::to_string(p) +
                                  ": relaxation time must be positive and finite");
    }
  }
}

double MaxwellChain::instantaneous_stiffness() const {
  double k0 = long_term_stiffness_;
  for (const MaxwellCell& c : cells_) k0 += c.stiffness;
  return k0;
}

MaxwellChain MaxwellChain::with_stiffness_scale(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw std::invalid_argument("stiffness scale must be positive and finite");
  }
  std::vector<MaxwellCell> scaled = cells_;
  for (MaxwellCell& c : scaled) c.stiffness *= factor;
  return MaxwellChain(long_term_stiffness_ * factor, std::move(scaled));
}

StepCoefficients step_coefficients(const MaxwellChain& chain, double dt) {
  if (dt < 0.0 || !std::isfinite(dt)) {
    throw std::domain_error("step size must be non-negative and finite");
  }
  const std::size_t n = chain.cell_count();
  StepCoefficients c;
  c.dt = dt;
  c.theta_hat.resize(n);
  c.decay.resize(n);
  c.accel_weight.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const MaxwellCell& cell = chain.cells()[p];
    const double x = dt / cell.relaxation_time;
    // theta_hat = theta (1 - exp(-x)) via expm1, so theta_hat -> dt smoothly
    // as x -> 0 instead of cancelling to noise.
    c.theta_hat[p] = cell.relaxation_time * -std::expm1(-x);
    // decay = 1 - theta_hat / theta collapses algebraically to exp(-x); the
    // literal subtraction would round 1 - decay to zero for x <~ 1e-8.
    c.decay[p] = std::exp(-x);
    // accel_weight = eta/2 (dt - theta_hat) = eta theta g(x) / 2.
    c.accel_weight[p] =
        0.5 * cell.viscosity() * cell.relaxation_time * decay_remainder(x);
    c.accel_weight_sum += c.accel_weight[p];
    c.stiffness_theta_hat_sum += cell.stiffness * c.theta_hat[p];
  }
  return c;
}

MaxwellChain parse_chain(std::istream& in, const std::string& origin) {
  std::string raw;
  int lineno = 0;
  bool have_kinf = false;
  double kinf = 0.0;
  std::vector<MaxwellCell> cells;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = strip(raw);
    if (line.empty()) continue;
    if (!have_kinf) {
      auto eq = line.find('=');
      if (eq == std::string_view::npos || trim(line.substr(0, eq)) != "k_inf") {
        fail(origin, lineno, "expected 'k_inf = <value>' before any cell row");
      }
      if (!parse_double(trim(line.substr(eq + 1)), kinf)) {
        fail(origin, lineno, "cannot parse k_inf value");
      }
      if (!(kinf > 0.0) || !std::isfinite(kinf)) {
        fail(origin, lineno, "k_inf must be positive and finite");
      }
      have_kinf = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string_view::npos) {
      fail(origin, lineno, "expected 'k_p, theta_p' row");
    }
    MaxwellCell cell;
    if (!parse_double(trim(line.substr(0, comma)), cell.stiffness)) {
      fail(origin, lineno, "cannot parse cell stiffness");
    }
    if (!parse_double(trim(line.substr(comma + 1)), cell.relaxation_time)) {
      fail(origin, lineno, "cannot parse cell relaxation time");
    }
    if (!(cell.stiffness > 0.0) || !std::isfinite(cell.stiffness)) {
      fail(origin, lineno, "cell stiffness must be positive and finite");
    }
    if (!(cell.relaxation_time > 0.0) || !std::isfinite(cell.relaxation_time)) {
      fail(origin, lineno, "cell relaxation time must be positive and finite");
    }
    cells.push_back(cell);
  }
  if (!have_kinf) {
    throw ParseError(origin + ": missing 'k_inf = <value>' line");
  }
  return MaxwellChain(kinf, std::move(cells));
}

MaxwellChain load_chain_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path + ": cannot open chain file");
  }
  return parse_chain(in, path);
}

void serialize_chain(const MaxwellChain& chain, std::ostream& out) {
  out << "k_inf = " << full_precision(chain.long_term_stiffness()) << "\n";
  for (const MaxwellCell& c : chain.cells()) {
    out << full_precision(c.stiffness) << ", "
        << full_precision(c.relaxation_time) << "\n";
  }
}

}  // namespace viscodyn
