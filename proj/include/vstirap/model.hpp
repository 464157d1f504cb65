#pragma once

// Assembly of the rotating-frame Hamiltonian and the Lindblad collapse
// operators on the composite atom (x) cavity Hilbert space.
//
// Conventions:
//  * The quantisation axis is the cavity axis, so the cavity couples only
//    through the circular components q = +/-1 on F=1 <-> F'=1. SingleMode
//    folds both components onto one polarisation-blind bosonic mode (the
//    configuration that reproduces the published theory curves); TwoModes
//    resolves an explicit sigma+/sigma- pair.
//  * g is the coupling of the strongest F=1 <-> F'=1 Zeeman component; all
//    sigma components of that transition share the same Clebsch-Gordan
//    magnitude, so every allowed cavity channel couples at +-g.
//  * Omega_c(t) is the Rabi frequency on the |2,0> <-> |1',0> pi channel;
//    the other pi channels scale by their relative dipole amplitudes.
//  * Frame: co-rotating with control laser and cavity at two-photon
//    resonance; delta sits on the excited-manifold projector and the
//    two-photon detuning on the F=1 projector.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstirap/common.hpp"
#include "vstirap/levels.hpp"
#include "vstirap/operators.hpp"
#include "vstirap/params.hpp"
#include "vstirap/pulse.hpp"

namespace vstirap {

struct CollapseChannel {
  enum class Type { CavityDecay, FreeSpace };
  Type type;
  int q = 0;                                // polarisation (cavity: mode label)
  Manifold target = Manifold::GroundF1;     // FreeSpace only
  SparseOp op;                              // includes sqrt(rate)
  std::string label;
};

inline int mode_count(PolarizationModes m) {
  return m == PolarizationModes::TwoModes ? 2 : 1;
}

/// 11 * (n_max+1)^m with m the number of cavity modes.
inline int composite_dimension(const SystemParams& p) {
  if (p.n_max < 1) throw std::domain_error("composite_dimension: n_max must be >= 1");
  int per_mode = p.n_max + 1;
  int dim = kAtomicStates;
  for (int i = 0; i < mode_count(p.modes); ++i) dim *= per_mode;
  return dim;
}

struct LindbladModel {
  int dim = 0;
  int n_modes = 1;
  SystemParams params;
  PulseProfile pulse;

  SparseOp h_static;  // detunings + cavity coupling
  SparseOp h_drive;   // multiplied by Omega(t); carries the factor 1/2
  std::vector<CollapseChannel> channels;
  SparseOp sum_ldag_l;     // sum over channels of L^dag L
  SparseOp drift;          // -i h_static - sum_ldag_l / 2

  // Observables used for recording and bookkeeping.
  std::vector<SparseOp> number_mode;  // per cavity mode
  SparseOp number_total;
  SparseOp proj_excited;
  SparseOp proj_f1;
  SparseOp proj_f2;
  SparseOp excited_with_photon;  // P_excited (x) n_total

  double omega(double t) const { return pulse.omega(t); }

  SparseOp hamiltonian(double t) const {
    SparseOp h = h_static;
    double w = omega(t);
    if (w != 0.0) h += w * h_drive;
    return h;
  }

  /// |2,0> (x) vacuum.
  StateVec initial_pure() const;
  /// Density form of the configured initial state.
  DenseOp initial_density() const;
  /// Mixture components (state index, weight) of the configured initial state.
  std::vector<std::pair<int, double>> initial_mixture() const;
};

namespace detail {

struct ModeLayout {
  int n_modes;
  int per_mode;
  int atom_dim = kAtomicStates;

  // Composite index for atom state |a> with photon numbers per mode.
  int index(int a, const std::vector<int>& ns) const {
    int idx = a;
    for (int m = 0; m < n_modes; ++m) idx = idx * per_mode + ns[m];
    return idx;
  }

  SparseOp embed_atomic(const SparseOp& op) const {
    SparseOp out = op;
    for (int m = 0; m < n_modes; ++m) out = kron(out, sparse_identity(per_mode));
    return out;
  }

  SparseOp embed_mode(const SparseOp& op, int mode) const {
    SparseOp out = sparse_identity(atom_dim);
    for (int m = 0; m < n_modes; ++m)
      out = kron(out, m == mode ? op : sparse_identity(per_mode));
    return out;
  }
};

inline SparseOp atomic_projector(Manifold m) {
  std::vector<int> idx;
  int f = manifold_f(m);
  for (int mf = -f; mf <= f; ++mf) idx.push_back(atomic_index(m, mf));
  return projector(kAtomicStates, idx);
}

}  // namespace detail

/// All labelled collapse operators: per cavity mode sqrt(2 kappa) a_q, and
/// per (polarisation, ground manifold) the aggregated atomic channel
/// sqrt(2 gamma) sum_g amp(e,g,q) |g><e|. Summed over channels, L^dag L
/// restricted to the excited manifold equals 2 gamma there.
inline std::vector<CollapseChannel> collapse_operators(const SystemParams& p) {
  detail::ModeLayout lay{mode_count(p.modes), p.n_max + 1};
  std::vector<CollapseChannel> out;

  SparseOp a = annihilation(lay.per_mode);
  for (int m = 0; m < lay.n_modes; ++m) {
    CollapseChannel ch;
    ch.type = CollapseChannel::Type::CavityDecay;
    ch.q = (p.modes == PolarizationModes::TwoModes) ? (m == 0 ? +1 : -1) : 0;
    ch.op = std::sqrt(2.0 * p.kappa) * lay.embed_mode(a, m);
    ch.label = p.modes == PolarizationModes::TwoModes
                   ? (m == 0 ? "cavity_sigma+" : "cavity_sigma-")
                   : "cavity";
    out.push_back(std::move(ch));
  }

  auto basis = build_basis(p.line);
  for (int q = -1; q <= 1; ++q) {
    for (Manifold target : {Manifold::GroundF1, Manifold::GroundF2}) {
      SparseOp op(kAtomicStates, kAtomicStates);
      std::vector<Eigen::Triplet<cplx>> trip;
      for (const auto& g : basis) {
        if (g.manifold != target) continue;
        AtomicState e{Manifold::ExcitedF1, g.mf + q};
        if (std::abs(e.mf) > 1) continue;
        double amp = coupling_amplitude(e, g, q, p.line);
        if (amp == 0.0) continue;
        trip.emplace_back(atomic_index(g), atomic_index(e), amp);
      }
      op.setFromTriplets(trip.begin(), trip.end());
      if (op.nonZeros() == 0) continue;
      CollapseChannel ch;
      ch.type = CollapseChannel::Type::FreeSpace;
      ch.q = q;
      ch.target = target;
      ch.op = std::sqrt(2.0 * p.gamma) * lay.embed_atomic(op);
      ch.label = std::string("free_space_q") + (q < 0 ? "-1" : q > 0 ? "+1" : "0") +
                 (target == Manifold::GroundF1 ? "_F1" : "_F2");
      out.push_back(std::move(ch));
    }
  }
  return out;
}

/// Rotating-frame Hamiltonian at time t (drive evaluated from the pulse).
inline SparseOp build_hamiltonian(const SystemParams& p, const PulseProfile& pulse, double t);

inline LindbladModel build_model(const SystemParams& p, const PulseProfile& pulse) {
  auto violations = p.validate();
  if (!violations.empty()) throw std::domain_error("build_model: " + violations.front());

  LindbladModel m;
  m.params = p;
  m.pulse = pulse;
  m.n_modes = mode_count(p.modes);
  m.dim = composite_dimension(p);

  detail::ModeLayout lay{m.n_modes, p.n_max + 1};
  auto basis = build_basis(p.line);
  auto [b1, b2] = hyperfine_branching(p.line);

  // Detunings.
  SparseOp h = p.delta * lay.embed_atomic(detail::atomic_projector(Manifold::ExcitedF1));
  if (p.two_photon_detuning != 0.0)
    h += p.two_photon_detuning * lay.embed_atomic(detail::atomic_projector(Manifold::GroundF1));

  // Cavity coupling, q = +/-1 on F=1 <-> F'=1. Every allowed sigma channel of
  // that transition has Clebsch-Gordan magnitude 1/sqrt(2), so the reference
  // amplitude is sqrt(b1/2) and all channels couple at +-g.
  const double g_phys = p.coupling();
  const double amp_ref_cav = std::sqrt(b1 / 2.0);
  SparseOp a = annihilation(lay.per_mode);
  auto mode_ops = std::vector<SparseOp>{};
  for (int mode = 0; mode < m.n_modes; ++mode) mode_ops.push_back(lay.embed_mode(a, mode));

  auto cavity_qs = p.modes == PolarizationModes::TwoModes
                       ? std::vector<std::vector<int>>{{+1}, {-1}}
                       : std::vector<std::vector<int>>{{+1, -1}};
  for (int mode = 0; mode < m.n_modes; ++mode) {
    for (int q : cavity_qs[mode]) {
      for (const auto& gs : basis) {
        if (gs.manifold != Manifold::GroundF1) continue;
        AtomicState e{Manifold::ExcitedF1, gs.mf + q};
        if (std::abs(e.mf) > 1) continue;
        double amp = coupling_amplitude(e, gs, q, p.line);
        if (amp == 0.0) continue;
        double coupling = g_phys * amp / amp_ref_cav;
        SparseOp lower =
            lay.embed_atomic(transfer(kAtomicStates, atomic_index(gs), atomic_index(e)));
        SparseOp term = dagger(mode_ops[mode]) * lower;
        h += coupling * term;
        h += coupling * dagger(term);
      }
    }
  }
  m.h_static = h;

  // Pi drive on F=2 <-> F'=1, referenced to the |2,0> <-> |1',0> channel.
  const double amp_ref_drive =
      coupling_amplitude({Manifold::ExcitedF1, 0}, {Manifold::GroundF2, 0}, 0, p.line);
  SparseOp hd(kAtomicStates, kAtomicStates);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (const auto& gs : basis) {
    if (gs.manifold != Manifold::GroundF2) continue;
    AtomicState e{Manifold::ExcitedF1, gs.mf};
    if (std::abs(e.mf) > 1) continue;
    double amp = coupling_amplitude(e, gs, 0, p.line);
    if (amp == 0.0) continue;
    double rel = amp / amp_ref_drive;
    trip.emplace_back(atomic_index(e), atomic_index(gs), 0.5 * rel);
    trip.emplace_back(atomic_index(gs), atomic_index(e), 0.5 * rel);
  }
  hd.setFromTriplets(trip.begin(), trip.end());
  m.h_drive = lay.embed_atomic(hd);

  m.channels = collapse_operators(p);
  SparseOp s(m.dim, m.dim);
  for (const auto& ch : m.channels) s += SparseOp(dagger(ch.op) * ch.op);
  m.sum_ldag_l = s;
  m.drift = SparseOp(-kImag * m.h_static - 0.5 * m.sum_ldag_l);
  m.drift.makeCompressed();

  // Observables.
  SparseOp n_single = dagger(a) * a;
  SparseOp n_total(m.dim, m.dim);
  for (int mode = 0; mode < m.n_modes; ++mode) {
    m.number_mode.push_back(lay.embed_mode(n_single, mode));
    n_total += m.number_mode.back();
  }
  m.number_total = n_total;
  m.proj_excited = lay.embed_atomic(detail::atomic_projector(Manifold::ExcitedF1));
  m.proj_f1 = lay.embed_atomic(detail::atomic_projector(Manifold::GroundF1));
  m.proj_f2 = lay.embed_atomic(detail::atomic_projector(Manifold::GroundF2));
  m.excited_with_photon = SparseOp(m.proj_excited * m.number_total);
  return m;
}

inline SparseOp build_hamiltonian(const SystemParams& p, const PulseProfile& pulse, double t) {
  if (!std::isfinite(t)) throw std::domain_error("build_hamiltonian: t must be finite");
  return build_model(p, pulse).hamiltonian(t);
}

inline std::vector<std::pair<int, double>> LindbladModel::initial_mixture() const {
  detail::ModeLayout lay{n_modes, params.n_max + 1};
  std::vector<int> vac(n_modes, 0);
  std::vector<std::pair<int, double>> mix;
  int idx20 = lay.index(atomic_index(Manifold::GroundF2, 0), vac);
  if (params.initial.kind == InitialState::Kind::PureF20) {
    mix.emplace_back(idx20, 1.0);
    return mix;
  }
  double f = params.initial.fidelity;
  mix.emplace_back(idx20, f);
  for (int mf : {-2, -1, 1, 2})
    mix.emplace_back(lay.index(atomic_index(Manifold::GroundF2, mf), vac), (1.0 - f) / 4.0);
  return mix;
}

inline StateVec LindbladModel::initial_pure() const {
  detail::ModeLayout lay{n_modes, params.n_max + 1};
  std::vector<int> vac(n_modes, 0);
  StateVec psi = StateVec::Zero(dim);
  psi(lay.index(atomic_index(Manifold::GroundF2, 0), vac)) = 1.0;
  return psi;
}

inline DenseOp LindbladModel::initial_density() const {
  DenseOp rho = DenseOp::Zero(dim, dim);
  for (auto [idx, w] : initial_mixture()) rho(idx, idx) = w;
  return rho;
}

}  // namespace vstirap
