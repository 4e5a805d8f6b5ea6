#include "viscodyn/load.hpp"

#include <cmath>
#include <stdexcept>

namespace viscodyn {

LoadSignal LoadSignal::step(double amplitude) {
  if (!std::isfinite(amplitude)) {
    throw std::invalid_argument("step amplitude must be finite");
  }
  LoadSignal s;
  s.kind_ = Kind::Step;
  s.amplitude_ = amplitude;
  return s;
}

LoadSignal LoadSignal::harmonic(double amplitude, double omega) {
  if (!std::isfinite(amplitude) || !std::isfinite(omega)) {
    throw std::invalid_argument("harmonic amplitude and frequency must be finite");
  }
  LoadSignal s;
  s.kind_ = Kind::Harmonic;
  s.amplitude_ = amplitude;
  s.omega_ = omega;
  return s;
}

LoadSignal LoadSignal::tabulated(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("tabulated load needs at least one sample");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second)) {
      throw std::invalid_argument("tabulated load sample " + std::to_string(i) +
                                  " is not finite");
    }
    if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
      throw std::invalid_argument("tabulated load times must strictly increase");
    }
  }
  LoadSignal s;
  s.kind_ = Kind::Tabulated;
  s.samples_ = std::move(samples);
  return s;
}

double LoadSignal::operator()(double t) const {
  switch (kind_) {
    case Kind::Step:
      return amplitude_;
    case Kind::Harmonic:
      return amplitude_ * std::sin(omega_ * t);
    case Kind::Tabulated: {
      if (t <= samples_.front().first) return samples_.front().second;
      if (t >= samples_.back().first) return samples_.back().second;
      // Binary search for the bracketing interval, then interpolate.
      std::size_t lo = 0, hi = samples_.size() - 1;
      while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        (samples_[mid].first <= t ? lo : hi) = mid;
      }
      const auto& [t0, f0] = samples_[lo];
      const auto& [t1, f1] = samples_[hi];
      return f0 + (f1 - f0) * (t - t0) / (t1 - t0);
    }
  }
  return 0.0;  // unreachable
}

}  // namespace viscodyn
