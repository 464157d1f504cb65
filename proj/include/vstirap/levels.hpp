#pragma once

// Atomic level structure for the 87Rb D lines restricted to the manifolds
// that take part in the Raman photon generation scheme: the F=1 and F=2
// hyperfine ground manifolds and the F'=1 excited manifold. Dipole
// amplitudes are relative: they are normalised so that the squared
// amplitudes out of any excited Zeeman state sum to one, with the physical
// rate scale carried entirely by the decay rate gamma.

#include <array>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "vstirap/angular.hpp"

namespace vstirap {

enum class Line { D1, D2 };

enum class Manifold { GroundF1, GroundF2, ExcitedF1 };

struct AtomicState {
  Manifold manifold;
  int mf;

  bool operator==(const AtomicState&) const = default;
};

inline int manifold_f(Manifold m) {
  switch (m) {
    case Manifold::GroundF1: return 1;
    case Manifold::GroundF2: return 2;
    case Manifold::ExcitedF1: return 1;
  }
  throw std::logic_error("manifold_f: bad manifold");
}

inline bool is_ground(Manifold m) { return m != Manifold::ExcitedF1; }

inline constexpr int kAtomicStates = 11;

/// Basis order: F=1 (mF=-1..1), F=2 (mF=-2..2), F'=1 (mF=-1..1).
/// The order is line-independent; the line only selects the coupling table.
inline std::array<AtomicState, kAtomicStates> build_basis(Line /*line*/ = Line::D2) {
  std::array<AtomicState, kAtomicStates> basis{};
  int i = 0;
  for (int m = -1; m <= 1; ++m) basis[i++] = {Manifold::GroundF1, m};
  for (int m = -2; m <= 2; ++m) basis[i++] = {Manifold::GroundF2, m};
  for (int m = -1; m <= 1; ++m) basis[i++] = {Manifold::ExcitedF1, m};
  return basis;
}

inline int atomic_index(Manifold manifold, int mf) {
  int f = manifold_f(manifold);
  if (mf < -f || mf > f) throw std::domain_error("atomic_index: |mF| exceeds F");
  switch (manifold) {
    case Manifold::GroundF1: return mf + 1;
    case Manifold::GroundF2: return 3 + mf + 2;
    case Manifold::ExcitedF1: return 8 + mf + 1;
  }
  throw std::logic_error("atomic_index: bad manifold");
}

inline int atomic_index(const AtomicState& s) { return atomic_index(s.manifold, s.mf); }

namespace detail {

// 5S(1/2) ground, I = 3/2; excited J' = 1/2 for D1, 3/2 for D2.
inline int excited_two_j(Line line) { return line == Line::D1 ? 1 : 3; }

}  // namespace detail

/// Fraction of F'=1 spontaneous decay into (F=1, F=2). The fractions are the
/// (2F+1)-weighted 6-j strength factors, normalised over both ground
/// manifolds, and come out as (1/6, 5/6) for D1 and (5/6, 1/6) for D2.
inline std::pair<double, double> hyperfine_branching(Line line) {
  const int two_j = 1;                               // ground J = 1/2
  const int two_jp = detail::excited_two_j(line);    // excited J'
  const int two_i = 3;                               // nuclear I = 3/2
  double w[2];
  for (int f = 1; f <= 2; ++f) {
    double sj = angular::sixj(two_j, two_jp, 2, 2 /*F'=1*/, 2 * f, two_i);
    w[f - 1] = (2 * f + 1) * sj * sj;
  }
  double total = w[0] + w[1];
  return {w[0] / total, w[1] / total};
}

/// Signed relative dipole amplitude for the decay channel
/// |F'=1, mE> -> |F, mG> emitting polarisation q, normalised so that the
/// squares out of each excited state sum to one. Zero unless mE = mG + q.
inline double coupling_amplitude(const AtomicState& excited, const AtomicState& ground,
                                 int q, Line line) {
  if (excited.manifold != Manifold::ExcitedF1 || !is_ground(ground.manifold))
    throw std::domain_error("coupling_amplitude: needs an excited and a ground state");
  if (q < -1 || q > 1) throw std::domain_error("coupling_amplitude: q must be -1, 0 or +1");
  int fg = manifold_f(ground.manifold);
  if (std::abs(ground.mf) > fg || std::abs(excited.mf) > 1)
    throw std::domain_error("coupling_amplitude: |mF| exceeds F");
  if (excited.mf != ground.mf + q) return 0.0;

  auto [b1, b2] = hyperfine_branching(line);
  double branch = ground.manifold == Manifold::GroundF1 ? b1 : b2;
  double c = angular::cg(2 * fg, 2 * ground.mf, 2, 2 * q, 2, 2 * excited.mf);
  return std::sqrt(branch) * c;
}

/// Relative strength of the F=1 <-> F'=1 reduced dipole element of `line`
/// against the same transition on D1. The recoupling part comes from the
/// 6-j strength factors; the fine-structure reduced elements of the two D
/// lines contribute a further factor 2 in strength (LS limit). For D2 the
/// result is sqrt(5).
inline double reduced_dipole_ratio(Line line) {
  auto strength = [](Line l) {
    double sj = angular::sixj(1, detail::excited_two_j(l), 2, 2, 2, 3);
    double fine = l == Line::D1 ? 1.0 : 2.0;
    return sj * sj * fine;
  };
  return std::sqrt(strength(line) / strength(Line::D1));
}

struct LineSpec {
  Line line;
  double reduced_dipole_ratio;  // relative to D1
};

inline LineSpec line_spec(Line line) { return {line, reduced_dipole_ratio(line)}; }

inline const char* line_name(Line line) { return line == Line::D1 ? "D1" : "D2"; }

/// Plain-text dump of the full coupling table (for documentation and
/// regression snapshots).
inline void write_coupling_table(std::ostream& os, Line line) {
  os << "# line excited_mF ground_manifold ground_mF q amplitude amplitude_sq\n";
  auto basis = build_basis(line);
  for (const auto& e : basis) {
    if (e.manifold != Manifold::ExcitedF1) continue;
    for (const auto& g : basis) {
      if (!is_ground(g.manifold)) continue;
      for (int q = -1; q <= 1; ++q) {
        double a = coupling_amplitude(e, g, q, line);
        if (a == 0.0) continue;
        os << line_name(line) << ' ' << e.mf << ' '
           << (g.manifold == Manifold::GroundF1 ? "F1" : "F2") << ' ' << g.mf << ' ' << q
           << ' ' << a << ' ' << a * a << '\n';
      }
    }
  }
}

}  // namespace vstirap
