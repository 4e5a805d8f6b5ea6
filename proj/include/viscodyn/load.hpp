#pragma once

#include <utility>
#include <vector>

namespace viscodyn {

// Scalar load history F(t). Three shapes:
//   step       F(t) = amplitude                 (t >= 0)
//   harmonic   F(t) = amplitude * sin(omega t)
//   tabulated  linear interpolation between samples, clamped outside
class LoadSignal {
 public:
  enum class Kind { Step, Harmonic, Tabulated };

  // Zero step load; mainly useful as a placeholder before configuration.
  LoadSignal() = default;

  static LoadSignal step(double amplitude);
  static LoadSignal harmonic(double amplitude, double omega);
  // Samples are (t, F) pairs with strictly increasing, finite times.
  static LoadSignal tabulated(std::vector<std::pair<double, double>> samples);

  double operator()(double t) const;

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double omega() const { return omega_; }
  const std::vector<std::pair<double, double>>& samples() const { return samples_; }

 private:
  Kind kind_ = Kind::Step;
  double amplitude_ = 0.0;
  double omega_ = 0.0;
  std::vector<std::pair<double, double>> samples_;
};

}  // namespace viscodyn
