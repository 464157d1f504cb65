#pragma once

// Adaptive Dormand-Prince 5(4) integration with continuous (dense) output,
// plus the master-equation driver built on top of it.
//
// The density matrix is integrated as a flat complex vector. Observables are
// recorded by projecting the dense-output coefficients once per accepted
// step, which makes output-grid sampling and time integrals essentially
// free: each observable becomes a scalar quartic polynomial per step, and
// the emission integrals are the exact integrals of those polynomials.

#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "vstirap/common.hpp"
#include "vstirap/model.hpp"

namespace vstirap {

struct Dopri5Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0: choose automatically
  double h_max = 0.0;   // 0: span
  long max_steps = 4'000'000;
};

struct SolveStats {
  long n_steps = 0;
  long n_accepted = 0;
  long n_rejected = 0;
  long n_rhs = 0;
  double wall_seconds = 0.0;
};

/// Dense-output view over one accepted step.
struct StepSpan {
  double t0 = 0.0;
  double h = 0.0;
  const std::array<StateVec, 5>* rc = nullptr;

  double t1() const { return t0 + h; }

  void eval(double t, StateVec& out) const {
    const auto& r = *rc;
    double th = (t - t0) / h;
    double th1 = 1.0 - th;
    out = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
  }
};

namespace detail {

// Monomial coefficients of the scalar dense-output polynomial obtained by
// projecting the rcont vectors: v(th) = sum_j m[j] th^j.
inline std::array<cplx, 5> dense_monomials(const std::array<cplx, 5>& p) {
  return {p[0], p[1] + p[2], p[3] + p[4] - p[2], -(p[3] + 2.0 * p[4]), p[4]};
}

inline double dense_value(const std::array<cplx, 5>& m, double th) {
  cplx v = m[0] + th * (m[1] + th * (m[2] + th * (m[3] + th * m[4])));
  return v.real();
}

/// Integral of the polynomial over theta in [a, b], times the step size h.
inline double dense_integral(const std::array<cplx, 5>& m, double h, double a, double b) {
  double s = 0.0;
  double pa = 1.0, pb = 1.0;
  for (int j = 0; j < 5; ++j) {
    pa *= a;
    pb *= b;
    s += m[j].real() * (pb - pa) / (j + 1);
  }
  return h * s;
}

inline cplx trace_sparse_times(const SparseOp& op, const Eigen::Map<const DenseOp>& rho) {
  cplx s = 0.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseOp::InnerIterator it(op, k); it; ++it) s += it.value() * rho(it.col(), it.row());
  return s;
}

}  // namespace detail

/// Integrate y' = rhs(t, y) from t0 to t_end. After every accepted step the
/// observer is called with the dense-output span and the new endpoint state;
/// returning false stops the integration at that step. Throws SolverError on
/// step-size underflow.
template <class RHS, class Observer>
inline SolveStats dopri5_integrate(RHS&& rhs, double t0, StateVec& y, double t_end,
                                   const Dopri5Options& opt, Observer&& observer) {
  constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0, a41 = 44.0 / 45.0,
                   a42 = -56.0 / 15.0, a43 = 32.0 / 9.0, a51 = 19372.0 / 6561.0,
                   a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0,
                   a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                   a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
  constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                   b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                   e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                   d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                   d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
  constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
  constexpr double expo1 = 0.2 - beta * 0.75;

  SolveStats stats;
  auto wall0 = std::chrono::steady_clock::now();
  const auto n = y.size();
  const double span = t_end - t0;
  if (span <= 0.0) throw std::invalid_argument("dopri5_integrate: t_end must exceed t0");
  const double h_max = opt.h_max > 0.0 ? opt.h_max : span;

  StateVec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ys(n), ynew(n), err(n);
  std::array<StateVec, 5> rc{StateVec(n), StateVec(n), StateVec(n), StateVec(n), StateVec(n)};

  auto scaled_norm = [&](const StateVec& e, const StateVec& y0, const StateVec& y1) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      double q = std::abs(e[i]) / sc;
      acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(n));
  };

  double t = t0;
  rhs(t, y, k1);
  ++stats.n_rhs;

  double h = opt.h_init;
  if (h <= 0.0) {
    // Hairer-style starting step from the magnitudes of y and y'.
    double d0 = 0.0, dg = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += std::norm(y[i] / sc);
      dg += std::norm(k1[i] / sc);
    }
    d0 = std::sqrt(d0 / static_cast<double>(n));
    dg = std::sqrt(dg / static_cast<double>(n));
    double h0 = (d0 < 1e-10 || dg < 1e-10) ? 1e-6 : 0.01 * d0 / dg;
    h0 = std::min({h0, h_max, span});
    ys = y + h0 * k1;
    rhs(t + h0, ys, k2);
    ++stats.n_rhs;
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d2 += std::norm((k2[i] - k1[i]) / sc);
    }
    d2 = std::sqrt(d2 / static_cast<double>(n)) / h0;
    double dm = std::max(dg, d2);
    double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, h_max, span});
  }

  double facold = 1e-4;
  bool rejected = false;

  while (t < t_end) {
    if (stats.n_steps >= opt.max_steps)
      throw SolverError("dopri5_integrate: maximum step count exceeded", t);
    double h_left = t_end - t;
    if (h >= h_left) h = h_left;
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw SolverError("dopri5_integrate: step size underflow (stiffness?)", t);
    ++stats.n_steps;

    ys = y + h * (a21 * k1);
    rhs(t + c2 * h, ys, k2);
    ys = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ys, k3);
    ys = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ys, k4);
    ys = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ys, k5);
    ys = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ys, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, ynew, k7);
    stats.n_rhs += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double errn = scaled_norm(err, y, ynew);

    double fac11 = std::pow(std::max(errn, 1e-32), expo1);
    if (errn <= 1.0) {
      rc[0] = y;
      rc[1] = ynew - y;
      rc[2] = h * k1 - rc[1];
      rc[3] = rc[1] - h * k7 - rc[2];
      rc[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      StepSpan step{t, h, &rc};

      double fac = fac11 / std::pow(facold, beta);
      fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
      double hnew = h / fac;
      facold = std::max(errn, 1e-4);

      t += h;
      y.swap(ynew);
      k1.swap(k7);  // first-same-as-last
      ++stats.n_accepted;

      bool keep_going = observer(step, t, y);
      if (!keep_going) break;

      if (rejected) hnew = std::min(hnew, h);
      rejected = false;
      h = std::min(hnew, h_max);
    } else {
      h /= std::min(1.0 / facl, fac11 / safe);
      rejected = true;
      ++stats.n_rejected;
    }
  }

  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  return stats;
}

struct QuietStop {
  double threshold = 1e-6;
  double horizon_factor = 10.0;
};

struct MasterOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_out = 0.0;  // 0: span/800
  bool record_states = false;
  std::optional<QuietStop> quiet;
  long max_steps = 4'000'000;
};

struct ChannelInfo {
  CollapseChannel::Type type;
  int q;
  Manifold target;
  std::string label;
};

/// Recorded master-equation evolution. Series are sampled on the output
/// grid; the emission integrals are exact integrals of the solver's dense
/// output over the evolved span.
struct Trajectory {
  std::vector<double> times;

  std::vector<std::vector<double>> mode_population;  // <a_q^dag a_q> per mode
  std::vector<double> cavity_population;             // summed over modes
  std::vector<double> excited_population;
  std::vector<double> f1_population;
  std::vector<double> f2_population;
  std::vector<double> trace;
  std::vector<double> excited_photon_joint;       // <P_e (x) n>
  std::vector<std::vector<double>> channel_flux;  // <L_k^dag L_k>
  std::vector<double> cumulative_cavity_flux;     // running cavity emission

  std::vector<ChannelInfo> channels;
  std::vector<double> channel_emission;  // integral of <L_k^dag L_k> dt
  double excited_time_integral = 0.0;    // integral of <P_e> dt
  double joint_time_integral = 0.0;      // integral of <P_e (x) n> dt

  DenseOp final_state;
  double t_final = 0.0;
  double pulse_end = 0.0;
  double quiet_time = -1.0;        // < 0 when not reached / not requested
  bool truncated_horizon = false;  // horizon cap hit before going quiet

  std::vector<DenseOp> states;  // populated only when record_states

  SystemParams params;
  PulseProfile pulse;
  MasterOptions options;
  SolveStats stats;

  int n_modes() const { return static_cast<int>(mode_population.size()); }
  double total_excitation(std::size_t i) const {
    return cavity_population[i] + excited_population[i];
  }
};

/// Solve d rho/dt = -i[H(t), rho] + sum_k (L rho L^dag - {L^dag L, rho}/2)
/// from rho0 up to t_end, or until the system goes quiet when requested.
inline Trajectory evolve_master(const LindbladModel& model, const DenseOp& rho0, double t_end,
                                const MasterOptions& opts = {}) {
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve_master: t_end must be > 0");
  if (!(opts.rtol > 0.0) || opts.rtol > 1e-4)
    throw std::invalid_argument("evolve_master: rtol must be in (0, 1e-4]");

  const int d = model.dim;
  const int n_modes = static_cast<int>(model.number_mode.size());
  if (rho0.rows() != d || rho0.cols() != d)
    throw std::invalid_argument("evolve_master: state dimension mismatch");

  const SparseOp drift_adj = dagger(model.drift);
  std::vector<SparseOp> l_adj;
  l_adj.reserve(model.channels.size());
  for (const auto& ch : model.channels) l_adj.push_back(dagger(ch.op));

  DenseOp work(d, d);
  auto rhs = [&](double t, const StateVec& yv, StateVec& dyv) {
    Eigen::Map<const DenseOp> rho(yv.data(), d, d);
    Eigen::Map<DenseOp> out(dyv.data(), d, d);
    out.noalias() = model.drift * rho;
    out.noalias() += rho * drift_adj;
    double w = model.omega(t);
    if (w != 0.0) {
      work.noalias() = model.h_drive * rho;
      work.noalias() -= rho * model.h_drive;
      out += (-kImag * w) * work;
    }
    for (std::size_t k = 0; k < model.channels.size(); ++k) {
      work.noalias() = model.channels[k].op * rho;
      out.noalias() += work * l_adj[k];
    }
  };

  // Observables projected per step: [modes..., excited, F1, F2, joint,
  // trace, channels...].
  const SparseOp identity = sparse_identity(d);
  std::vector<const SparseOp*> obs;
  for (const auto& nm : model.number_mode) obs.push_back(&nm);
  obs.push_back(&model.proj_excited);
  obs.push_back(&model.proj_f1);
  obs.push_back(&model.proj_f2);
  obs.push_back(&model.excited_with_photon);
  obs.push_back(&identity);
  const std::size_t i_excited = n_modes;
  const std::size_t i_f1 = n_modes + 1;
  const std::size_t i_f2 = n_modes + 2;
  const std::size_t i_joint = n_modes + 3;
  const std::size_t i_trace = n_modes + 4;
  const std::size_t n_fixed = n_modes + 5;
  std::vector<SparseOp> ldag_l;
  ldag_l.reserve(model.channels.size());
  for (std::size_t k = 0; k < model.channels.size(); ++k)
    ldag_l.push_back(SparseOp(l_adj[k] * model.channels[k].op));
  for (const auto& m : ldag_l) obs.push_back(&m);

  Trajectory traj;
  traj.params = model.params;
  traj.pulse = model.pulse;
  traj.options = opts;
  traj.pulse_end = model.pulse.switches_off() ? model.pulse.duration : t_end;
  traj.mode_population.resize(n_modes);
  traj.channel_flux.resize(model.channels.size());
  traj.channel_emission.assign(model.channels.size(), 0.0);
  for (const auto& ch : model.channels)
    traj.channels.push_back({ch.type, ch.q, ch.target, ch.label});

  const double dt_out = opts.dt_out > 0.0 ? opts.dt_out : t_end / 800.0;
  const std::size_t n_obs = obs.size();
  std::vector<std::array<cplx, 5>> mono(n_obs);
  std::vector<std::size_t> cavity_idx;
  for (std::size_t k = 0; k < model.channels.size(); ++k)
    if (model.channels[k].type == CollapseChannel::Type::CavityDecay)
      cavity_idx.push_back(n_fixed + k);

  double cavity_cum = 0.0;  // cavity emission integral before the current step
  StateVec dense_tmp(static_cast<Eigen::Index>(d) * d);

  auto record_point = [&](double t, const StepSpan* step,
                          const std::vector<std::array<cplx, 5>>& m) {
    traj.times.push_back(t);
    double th = step ? (t - step->t0) / step->h : 0.0;
    auto value = [&](std::size_t i) { return detail::dense_value(m[i], th); };
    double cav = 0.0;
    for (int q = 0; q < n_modes; ++q) {
      double v = value(q);
      traj.mode_population[q].push_back(v);
      cav += v;
    }
    traj.cavity_population.push_back(cav);
    traj.excited_population.push_back(value(i_excited));
    traj.f1_population.push_back(value(i_f1));
    traj.f2_population.push_back(value(i_f2));
    traj.excited_photon_joint.push_back(value(i_joint));
    traj.trace.push_back(value(i_trace));
    for (std::size_t k = 0; k < model.channels.size(); ++k)
      traj.channel_flux[k].push_back(value(n_fixed + k));
    double cum = cavity_cum;
    if (step)
      for (std::size_t ci : cavity_idx) cum += detail::dense_integral(m[ci], step->h, 0.0, th);
    traj.cumulative_cavity_flux.push_back(cum);
    if (opts.record_states && step) {
      step->eval(t, dense_tmp);
      traj.states.emplace_back(Eigen::Map<const DenseOp>(dense_tmp.data(), d, d));
    }
  };

  auto project_state = [&](const DenseOp& rho, std::vector<std::array<cplx, 5>>& m) {
    Eigen::Map<const DenseOp> r(rho.data(), d, d);
    for (std::size_t i = 0; i < n_obs; ++i)
      m[i] = {detail::trace_sparse_times(*obs[i], r), 0.0, 0.0, 0.0, 0.0};
  };

  {
    std::vector<std::array<cplx, 5>> m0(n_obs);
    project_state(rho0, m0);
    record_point(0.0, nullptr, m0);
    if (opts.record_states) traj.states.push_back(rho0);
  }

  double next_out = dt_out;
  double stop_time = -1.0;

  auto observer = [&](const StepSpan& step, double t_new, const StateVec& /*y_new*/) -> bool {
    for (std::size_t i = 0; i < n_obs; ++i) {
      std::array<cplx, 5> p;
      for (int j = 0; j < 5; ++j) {
        Eigen::Map<const DenseOp> rj((*step.rc)[j].data(), d, d);
        p[j] = detail::trace_sparse_times(*obs[i], rj);
      }
      mono[i] = detail::dense_monomials(p);
    }

    double cut_theta = 1.0;
    if (opts.quiet && t_new >= traj.pulse_end) {
      auto excitation = [&](double th) {
        double v = detail::dense_value(mono[i_excited], th);
        for (int q = 0; q < n_modes; ++q) v += detail::dense_value(mono[q], th);
        return v;
      };
      double th_lo = std::max(0.0, (traj.pulse_end - step.t0) / step.h);
      if (excitation(1.0) < opts.quiet->threshold) {
        if (excitation(th_lo) < opts.quiet->threshold) {
          cut_theta = th_lo;
        } else {
          double lo = th_lo, hi = 1.0;
          while ((hi - lo) * step.h > 1e-10) {
            double mid = 0.5 * (lo + hi);
            if (excitation(mid) < opts.quiet->threshold)
              hi = mid;
            else
              lo = mid;
          }
          cut_theta = hi;
        }
        stop_time = step.t0 + cut_theta * step.h;
      }
    }

    double t_stop = stop_time > 0.0 ? stop_time : t_new;
    while (next_out <= t_stop + 1e-12 && next_out <= t_end) {
      record_point(std::min(next_out, t_stop), &step, mono);
      next_out += dt_out;
    }
    if (stop_time > 0.0 && traj.times.back() < stop_time - 1e-12)
      record_point(stop_time, &step, mono);

    for (std::size_t k = 0; k < model.channels.size(); ++k)
      traj.channel_emission[k] +=
          detail::dense_integral(mono[n_fixed + k], step.h, 0.0, cut_theta);
    traj.excited_time_integral += detail::dense_integral(mono[i_excited], step.h, 0.0, cut_theta);
    traj.joint_time_integral += detail::dense_integral(mono[i_joint], step.h, 0.0, cut_theta);
    for (std::size_t ci : cavity_idx)
      cavity_cum += detail::dense_integral(mono[ci], step.h, 0.0, cut_theta);

    if (stop_time > 0.0) {
      step.eval(stop_time, dense_tmp);
      return false;
    }
    return true;
  };

  StateVec y(static_cast<Eigen::Index>(d) * d);
  Eigen::Map<DenseOp>(y.data(), d, d) = rho0;

  Dopri5Options dopt;
  dopt.rtol = opts.rtol;
  dopt.atol = opts.atol;
  dopt.max_steps = opts.max_steps;
  traj.stats = dopri5_integrate(rhs, 0.0, y, t_end, dopt, observer);

  if (stop_time > 0.0) {
    traj.quiet_time = stop_time;
    traj.t_final = stop_time;
    traj.final_state = Eigen::Map<const DenseOp>(dense_tmp.data(), d, d);
  } else {
    traj.t_final = t_end;
    traj.final_state = Eigen::Map<const DenseOp>(y.data(), d, d);
    if (opts.quiet) traj.truncated_horizon = true;
    if (traj.times.back() < t_end - 1e-12) {
      std::vector<std::array<cplx, 5>> mf(n_obs);
      project_state(traj.final_state, mf);
      record_point(t_end, nullptr, mf);
      if (opts.record_states) traj.states.push_back(traj.final_state);
    }
  }
  return traj;
}

/// First time past the end of the pulse at which the total excitation
/// (cavity photons plus excited population) drops below the threshold,
/// from the recorded series. Negative when the trajectory never goes quiet.
inline double stop_when_quiet(const Trajectory& traj, double threshold = 1e-6) {
  if (traj.quiet_time >= 0.0) return traj.quiet_time;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < traj.pulse_end) continue;
    if (traj.total_excitation(i) < threshold) return traj.times[i];
  }
  return -1.0;
}

/// Assemble the derived members of a hand-built model (test oracles build
/// small custom systems this way).
inline void finalize_model(LindbladModel& m) {
  SparseOp s(m.dim, m.dim);
  for (const auto& ch : m.channels) s += SparseOp(dagger(ch.op) * ch.op);
  m.sum_ldag_l = s;
  m.drift = SparseOp(-kImag * m.h_static - 0.5 * m.sum_ldag_l);
  m.drift.makeCompressed();
  m.n_modes = static_cast<int>(m.number_mode.size());
  SparseOp n_total(m.dim, m.dim);
  for (const auto& nm : m.number_mode) n_total += nm;
  m.number_total = n_total;
  auto ensure = [&](SparseOp& op) {
    if (op.rows() != m.dim) op = SparseOp(m.dim, m.dim);
  };
  ensure(m.proj_excited);
  ensure(m.proj_f1);
  ensure(m.proj_f2);
  if (m.h_drive.rows() != m.dim) m.h_drive = SparseOp(m.dim, m.dim);
  m.excited_with_photon = SparseOp(m.proj_excited * m.number_total);
}

}  // namespace vstirap
