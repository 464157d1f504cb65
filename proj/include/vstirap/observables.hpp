#pragma once

// Physical quantities extracted from a recorded evolution: generation
// efficiency, photon wave packet, excited-state population, per-channel
// emission budget and wave-packet width.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vstirap/integrator.hpp"

namespace vstirap {

struct EfficiencyResult {
  double value = 0.0;
  /// Set when the evolution hit the horizon cap before going quiet; the
  /// emission integral is then only a lower bound.
  bool lower_bound = false;
};

/// eta = 2 kappa integral of sum_q <a_q^dag a_q> dt, evaluated as the exact
/// integral of the solver's dense output (the cavity channel fluxes).
inline EfficiencyResult efficiency(const Trajectory& traj) {
  double eta = 0.0;
  for (std::size_t k = 0; k < traj.channels.size(); ++k)
    if (traj.channels[k].type == CollapseChannel::Type::CavityDecay)
      eta += traj.channel_emission[k];
  return {eta, traj.truncated_horizon};
}

struct Wavepacket {
  std::vector<double> times;       // us
  std::vector<double> flux;        // photons per us, 2 kappa sum_q <n_q>
  std::vector<double> cumulative;  // emission integral up to each time
  double total = 0.0;              // equals efficiency
  bool lower_bound = false;
};

/// Photon flux through the cavity mirrors, both polarisation modes summed.
inline Wavepacket wavepacket(const Trajectory& traj) {
  Wavepacket wp;
  wp.times = traj.times;
  wp.flux.assign(traj.times.size(), 0.0);
  for (std::size_t k = 0; k < traj.channels.size(); ++k)
    if (traj.channels[k].type == CollapseChannel::Type::CavityDecay)
      for (std::size_t i = 0; i < wp.flux.size(); ++i)
        wp.flux[i] += traj.channel_flux[k][i];
  wp.cumulative = traj.cumulative_cavity_flux;
  auto eff = efficiency(traj);
  wp.total = eff.value;
  wp.lower_bound = eff.lower_bound;
  return wp;
}

inline const std::vector<double>& excited_population(const Trajectory& traj) {
  return traj.excited_population;
}

struct EmissionBudget {
  double eta_cavity = 0.0;
  double free_space_f1 = 0.0;
  double free_space_f2 = 0.0;
  double residual_f2_population = 0.0;
  double residual_f1_population = 0.0;
  /// Cavity-routed share of the excited-manifold throughput. Every cavity
  /// photon is transferred through the excited manifold, so this is the
  /// fraction of excited-state decay quanta that leave through the cavity
  /// rather than into free space.
  double purcell_fraction = 0.0;

  double free_space_total() const { return free_space_f1 + free_space_f2; }
};

namespace detail {

inline double trace_with(const SparseOp& op, const DenseOp& rho) {
  return trace_sparse_times(op, Eigen::Map<const DenseOp>(rho.data(), rho.rows(), rho.rows()))
      .real();
}

}  // namespace detail

/// Per-channel integrated emission plus the residual atomic populations at
/// the end of the evolution.
inline EmissionBudget emission_budget(const Trajectory& traj, const LindbladModel& model) {
  EmissionBudget b;
  for (std::size_t k = 0; k < traj.channels.size(); ++k) {
    const auto& ch = traj.channels[k];
    if (ch.type == CollapseChannel::Type::CavityDecay) {
      b.eta_cavity += traj.channel_emission[k];
    } else if (ch.target == Manifold::GroundF1) {
      b.free_space_f1 += traj.channel_emission[k];
    } else {
      b.free_space_f2 += traj.channel_emission[k];
    }
  }
  b.residual_f1_population = detail::trace_with(model.proj_f1, traj.final_state);
  b.residual_f2_population = detail::trace_with(model.proj_f2, traj.final_state);
  double total = b.eta_cavity + b.free_space_total();
  if (total > 0.0) b.purcell_fraction = b.eta_cavity / total;
  return b;
}

/// Full width at half maximum of the flux envelope, linearly interpolated
/// between grid points. When the peak sits on the first sample the width is
/// measured single-sidedly from the peak to the half-maximum down-crossing.
inline double fwhm(const Wavepacket& wp) {
  const auto& f = wp.flux;
  const auto& t = wp.times;
  if (f.empty()) throw std::domain_error("fwhm: empty wave packet");
  std::size_t ipk = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] > f[ipk]) ipk = i;
  double peak = f[ipk];
  if (peak <= 0.0) throw std::domain_error("fwhm: flux is identically zero");
  double half = 0.5 * peak;

  auto cross = [&](std::size_t a, std::size_t b) {
    // linear interpolation of the half-maximum crossing between samples a, b
    double df = f[b] - f[a];
    if (df == 0.0) return t[a];
    return t[a] + (half - f[a]) * (t[b] - t[a]) / df;
  };

  double t_up = t[0];
  bool one_sided = true;
  for (std::size_t i = ipk; i-- > 0;) {
    if (f[i] < half) {
      t_up = cross(i, i + 1);
      one_sided = false;
      break;
    }
  }

  double t_down = t.back();
  if (f.back() < half) {
    for (std::size_t i = f.size() - 1; i-- > ipk;) {
      if (f[i] >= half) {
        t_down = cross(i, i + 1);
        break;
      }
    }
  }
  if (one_sided) return t_down - t[ipk];
  return t_down - t_up;
}

}  // namespace vstirap
