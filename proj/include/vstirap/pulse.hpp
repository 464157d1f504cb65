#pragma once

// Control-laser pulse envelopes Omega_c(t).

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vstirap {

struct PulseProfile {
  enum class Kind { LinearRamp, PowerLaw, PiecewiseLinear, Constant };

  Kind kind = Kind::LinearRamp;
  double duration = 3.0;   // us
  double omega_max = 0.0;  // rad/us, peak Rabi frequency
  double exponent = 1.0;   // PowerLaw only
  std::vector<std::pair<double, double>> knots;  // PiecewiseLinear: (t, omega)

  static PulseProfile linear_ramp(double duration_us, double omega_max) {
    return {Kind::LinearRamp, duration_us, omega_max, 1.0, {}};
  }
  static PulseProfile power_law(double duration_us, double omega_max, double exponent) {
    return {Kind::PowerLaw, duration_us, omega_max, exponent, {}};
  }
  static PulseProfile constant(double omega) {
    return {Kind::Constant, 0.0, omega, 1.0, {}};
  }
  static PulseProfile piecewise(std::vector<std::pair<double, double>> pts) {
    PulseProfile p{Kind::PiecewiseLinear, 0.0, 0.0, 1.0, std::move(pts)};
    for (const auto& [t, w] : p.knots) {
      p.duration = std::max(p.duration, t);
      p.omega_max = std::max(p.omega_max, w);
    }
    return p;
  }

  /// Omega(t); zero outside [0, duration] except for Constant pulses.
  double omega(double t) const {
    switch (kind) {
      case Kind::Constant:
        return omega_max;
      case Kind::LinearRamp:
        if (t < 0.0 || t > duration) return 0.0;
        return omega_max * t / duration;
      case Kind::PowerLaw:
        if (t < 0.0 || t > duration) return 0.0;
        return omega_max * std::pow(t / duration, exponent);
      case Kind::PiecewiseLinear: {
        if (knots.empty() || t < knots.front().first || t > knots.back().first) return 0.0;
        for (std::size_t i = 1; i < knots.size(); ++i) {
          if (t <= knots[i].first) {
            auto [t0, w0] = knots[i - 1];
            auto [t1, w1] = knots[i];
            if (t1 == t0) return w1;
            return w0 + (w1 - w0) * (t - t0) / (t1 - t0);
          }
        }
        return knots.back().second;
      }
    }
    throw std::logic_error("PulseProfile::omega: bad kind");
  }

  /// End of drive; Constant pulses never switch off.
  bool switches_off() const { return kind != Kind::Constant; }

  std::vector<std::string> validate() const {
    std::vector<std::string> v;
    if (kind != Kind::Constant && duration <= 0.0) v.push_back("pulse.duration must be > 0");
    if (omega_max < 0.0) v.push_back("pulse.omega_max must be >= 0");
    if (kind == Kind::PowerLaw && exponent <= 0.0) v.push_back("pulse.exponent must be > 0");
    if (kind == Kind::PiecewiseLinear) {
      if (knots.size() < 2) v.push_back("pulse.knots needs at least two points");
      for (std::size_t i = 0; i < knots.size(); ++i) {
        if (knots[i].second < 0.0) v.push_back("pulse.knots omega must be >= 0");
        if (i > 0 && knots[i].first <= knots[i - 1].first)
          v.push_back("pulse.knots times must be strictly increasing");
      }
    }
    return v;
  }
};

}  // namespace vstirap
