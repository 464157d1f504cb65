#pragma once

// High-level single-photon generation runs: build the model, evolve the
// master equation from the configured initial state until the system goes
// quiet after the pulse, and hand back the recorded trajectory.

#include <optional>

#include "vstirap/integrator.hpp"
#include "vstirap/model.hpp"
#include "vstirap/observables.hpp"

namespace vstirap {

struct SolverConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  int output_points = 1200;       // grid points across the pulse
  double quiet_threshold = 1e-6;  // total-excitation level that ends a run
  double horizon_factor = 10.0;   // cap, in pulse durations
  bool record_states = false;
  bool check_truncation = false;  // re-run at n_max+1 and compare eta

  MasterOptions master_options(double pulse_duration) const {
    MasterOptions m;
    m.rtol = rtol;
    m.atol = atol;
    m.dt_out = pulse_duration / static_cast<double>(output_points);
    m.record_states = record_states;
    m.quiet = QuietStop{quiet_threshold, horizon_factor};
    return m;
  }
};

/// One photon-generation attempt, evolved to the quiet horizon.
inline Trajectory run_generation(const SystemParams& params, const PulseProfile& pulse,
                                 const SolverConfig& cfg = {}) {
  LindbladModel model = build_model(params, pulse);
  MasterOptions opts = cfg.master_options(pulse.duration > 0.0 ? pulse.duration : 1.0);
  double horizon = cfg.horizon_factor * (pulse.duration > 0.0 ? pulse.duration : 1.0);
  return evolve_master(model, model.initial_density(), horizon, opts);
}

/// Convenience: efficiency of one generation attempt.
inline EfficiencyResult generation_efficiency(const SystemParams& params,
                                              const PulseProfile& pulse,
                                              const SolverConfig& cfg = {}) {
  return efficiency(run_generation(params, pulse, cfg));
}

/// Truncation check: eta at n_max against n_max+1. Returns the absolute
/// change; values above ~1e-4 mean the Fock truncation is too tight.
inline double truncation_error(const SystemParams& params, const PulseProfile& pulse,
                               const SolverConfig& cfg = {}) {
  SystemParams larger = params;
  larger.n_max += 1;
  double a = generation_efficiency(params, pulse, cfg).value;
  double b = generation_efficiency(larger, pulse, cfg).value;
  return std::abs(a - b);
}

}  // namespace vstirap
