#pragma once

// Physical configuration of the atom-cavity system.

#include <string>
#include <vector>

#include "vstirap/common.hpp"
#include "vstirap/levels.hpp"

namespace vstirap {

enum class PolarizationModes { TwoModes, SingleMode };

struct InitialState {
  enum class Kind { PureF20, PumpedMixture };
  Kind kind = Kind::PureF20;
  /// PumpedMixture: population prepared in |2,0>; the remainder is spread
  /// uniformly over the other four F=2 Zeeman states.
  double fidelity = 1.0;
};

struct SystemParams {
  Line line = Line::D2;
  double g_max = angular_from_mhz(5.1);   // rad/us, strongest F=1<->F'=1 Zeeman component
  double coupling_scale = 1.0;            // effective-coupling factor (motional averaging)
  double kappa = angular_from_mhz(2.8);   // rad/us, cavity field decay
  double gamma = angular_from_mhz(3.0);   // rad/us, atomic polarisation decay
  double delta = 0.0;                     // rad/us, virtual-level detuning
  double two_photon_detuning = 0.0;       // rad/us
  int n_max = 2;  // Fock truncation per cavity mode
  // One polarisation-blind mode carrying both circular components reproduces
  // the published theory values; the explicit sigma+/sigma- pair is kept as
  // the physically resolved alternative.
  PolarizationModes modes = PolarizationModes::SingleMode;
  InitialState initial;

  /// Cavity coupling actually entering the Hamiltonian.
  double coupling() const { return coupling_scale * g_max; }

  static SystemParams defaults(Line line) {
    SystemParams p;
    p.line = line;
    p.g_max = angular_from_mhz(line == Line::D1 ? 2.3 : 5.1);
    return p;
  }

  std::vector<std::string> validate() const {
    std::vector<std::string> v;
    if (g_max <= 0.0) v.push_back("system.g_max must be > 0");
    if (kappa <= 0.0) v.push_back("system.kappa must be > 0");
    if (gamma <= 0.0) v.push_back("system.gamma must be > 0");
    if (coupling_scale <= 0.0 || coupling_scale > 1.0)
      v.push_back("system.coupling_scale must be in (0, 1]");
    if (n_max < 1) v.push_back("system.n_max must be >= 1 (at least one photon)");
    if (initial.kind == InitialState::Kind::PumpedMixture &&
        (initial.fidelity < 0.0 || initial.fidelity > 1.0))
      v.push_back("system.preparation_fidelity must be in [0, 1]");
    return v;
  }
};

/// C = g^2 / (2 kappa gamma) with the effective coupling.
inline double cooperativity(const SystemParams& p) {
  double g = p.coupling();
  return g * g / (2.0 * p.kappa * p.gamma);
}

}  // namespace vstirap
