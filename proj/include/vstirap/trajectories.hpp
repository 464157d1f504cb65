#pragma once

// Monte Carlo wave-function (quantum-jump) unraveling of the master
// equation. Between jumps the state evolves under the non-Hermitian drift;
// a jump fires when the squared norm crosses a uniformly drawn threshold,
// with the crossing time located by bisection on the dense output and the
// channel drawn proportionally to <L^dag L>.
//
// Stream addressing: trajectory k consumes Philox stream (seed, k). Draw
// order per trajectory: optional initial-state pick, then alternating
// norm thresholds and channel picks. Ensemble reduction runs in fixed
// index order so results are bit-identical for a given seed regardless
// of thread count.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "vstirap/integrator.hpp"
#include "vstirap/observables.hpp"
#include "vstirap/rng.hpp"

namespace vstirap {

struct TrajectoryOptions {
  double rtol = 1e-6;
  double atol = 1e-9;
  double dt_out = 0.0;  // 0: t_end/400
  int jobs = 0;         // 0: hardware concurrency
  long max_steps = 4'000'000;
};

struct JumpEvent {
  double time;
  int channel;
};

struct JumpRecord {
  std::vector<JumpEvent> jumps;
  Eigen::VectorXd final_atomic_populations;  // over the 11-state atomic basis
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> mean_cavity, se_cavity;
  std::vector<double> mean_excited, se_excited;
  std::vector<double> mean_f1, mean_f2;
  std::vector<double> mean_channel_jumps;  // per collapse channel, per attempt
  std::vector<JumpRecord> records;
  std::vector<ChannelInfo> channels;
  int n_traj = 0;
};

namespace detail {

inline double expectation(const SparseOp& op, const StateVec& psi) {
  cplx s = 0.0;
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseOp::InnerIterator it(op, k); it; ++it)
      s += std::conj(psi[it.row()]) * it.value() * psi[it.col()];
  return s.real();
}

/// Atomic populations of a (normalised) composite pure state, traced over
/// the cavity modes. Assumes the atom-major index layout of the model.
inline Eigen::VectorXd atomic_populations(const StateVec& psi) {
  const int per_atom = static_cast<int>(psi.size()) / kAtomicStates;
  Eigen::VectorXd pops = Eigen::VectorXd::Zero(kAtomicStates);
  for (int a = 0; a < kAtomicStates; ++a)
    for (int j = 0; j < per_atom; ++j) pops[a] += std::norm(psi[a * per_atom + j]);
  double total = pops.sum();
  if (total > 0.0) pops /= total;
  return pops;
}

}  // namespace detail

/// Evolve one trajectory; record normalised expectations on the grid given
/// by `times` into the four series (caller-sized), and return the jump
/// record.
inline JumpRecord evolve_single_trajectory(const LindbladModel& model, StateVec psi,
                                           double t_end, Philox& rng,
                                           const TrajectoryOptions& opts,
                                           const std::vector<double>& times, double* cavity,
                                           double* excited, double* f1, double* f2) {
  const auto dim = psi.size();
  StateVec tmp(dim), probe(dim), jump_state(dim);
  std::vector<double> weights(model.channels.size());

  auto rhs = [&](double t, const StateVec& y, StateVec& dy) {
    dy.noalias() = model.drift * y;
    double w = model.omega(t);
    if (w != 0.0) {
      tmp.noalias() = model.h_drive * y;
      dy += (-kImag * w) * tmp;
    }
  };

  JumpRecord record;
  double threshold = rng.uniform_pos();
  double t = 0.0;
  std::size_t next_grid = 0;

  auto emit_grid = [&](double upto, const StepSpan* step) {
    while (next_grid < times.size() && times[next_grid] <= upto + 1e-12) {
      double tg = times[next_grid];
      const StateVec* s = &psi;
      if (step && tg > step->t0) {
        step->eval(tg, probe);
        s = &probe;
      }
      double n2 = s->squaredNorm();
      cavity[next_grid] = detail::expectation(model.number_total, *s) / n2;
      excited[next_grid] = detail::expectation(model.proj_excited, *s) / n2;
      f1[next_grid] = detail::expectation(model.proj_f1, *s) / n2;
      f2[next_grid] = detail::expectation(model.proj_f2, *s) / n2;
      ++next_grid;
    }
  };

  emit_grid(0.0, nullptr);

  Dopri5Options dopt;
  dopt.rtol = opts.rtol;
  dopt.atol = opts.atol;
  dopt.max_steps = opts.max_steps;

  while (t < t_end) {
    double jump_time = -1.0;
    auto observer = [&](const StepSpan& step, double t_new, const StateVec& y_new) -> bool {
      if (y_new.squaredNorm() < threshold) {
        // Norm crossed the threshold inside this step.
        double lo = step.t0, hi = t_new;
        while (hi - lo > 1e-10) {
          double mid = 0.5 * (lo + hi);
          step.eval(mid, probe);
          (probe.squaredNorm() < threshold ? hi : lo) = mid;
        }
        jump_time = hi;
        step.eval(jump_time, jump_state);
        emit_grid(jump_time, &step);
        return false;
      }
      emit_grid(t_new, &step);
      return true;
    };

    dopri5_integrate(rhs, t, psi, t_end, dopt, observer);

    if (jump_time < 0.0) {
      t = t_end;
      break;
    }

    // Channel selection proportional to <L^dag L>.
    double total = 0.0;
    for (std::size_t k = 0; k < model.channels.size(); ++k) {
      tmp.noalias() = model.channels[k].op * jump_state;
      weights[k] = tmp.squaredNorm();
      total += weights[k];
    }
    int channel = rng.pick(weights, total);
    record.jumps.push_back({jump_time, channel});
    psi.noalias() = model.channels[channel].op * jump_state;
    psi /= psi.norm();
    threshold = rng.uniform_pos();
    t = jump_time;
  }

  emit_grid(t_end, nullptr);
  record.final_atomic_populations = detail::atomic_populations(psi);
  return record;
}

/// Monte Carlo ensemble from an explicit initial pure state.
inline EnsembleResult evolve_trajectories(const LindbladModel& model, const StateVec& psi0,
                                          double t_end, int n_traj, std::uint64_t seed,
                                          const TrajectoryOptions& opts = {}) {
  if (n_traj < 1) throw std::invalid_argument("evolve_trajectories: n_traj must be >= 1");
  const bool sample_initial = psi0.size() == 0;
  auto mixture = sample_initial ? model.initial_mixture()
                                : std::vector<std::pair<int, double>>{};

  EnsembleResult out;
  out.n_traj = n_traj;
  out.channels.reserve(model.channels.size());
  for (const auto& ch : model.channels)
    out.channels.push_back({ch.type, ch.q, ch.target, ch.label});

  const double dt = opts.dt_out > 0.0 ? opts.dt_out : t_end / 400.0;
  for (double tg = 0.0; tg < t_end - 0.5 * dt; tg += dt) out.times.push_back(tg);
  out.times.push_back(t_end);
  const std::size_t ng = out.times.size();

  out.records.resize(n_traj);

  // Blocked, index-ordered reduction keeps sums independent of thread count.
  constexpr int kBlock = 64;
  const int n_blocks = (n_traj + kBlock - 1) / kBlock;
  struct BlockSums {
    std::vector<double> sum_cav, sq_cav, sum_exc, sq_exc, sum_f1, sum_f2;
    std::vector<double> jumps;
  };
  std::vector<BlockSums> blocks(n_blocks);

  std::atomic<int> next_block{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    std::vector<double> cav(ng), exc(ng), f1(ng), f2(ng);
    for (;;) {
      if (failed.load()) return;
      int b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      auto& bs = blocks[b];
      bs.sum_cav.assign(ng, 0.0);
      bs.sq_cav.assign(ng, 0.0);
      bs.sum_exc.assign(ng, 0.0);
      bs.sq_exc.assign(ng, 0.0);
      bs.sum_f1.assign(ng, 0.0);
      bs.sum_f2.assign(ng, 0.0);
      bs.jumps.assign(model.channels.size(), 0.0);
      int lo = b * kBlock, hi = std::min(n_traj, lo + kBlock);
      try {
      for (int k = lo; k < hi; ++k) {
        Philox rng(seed, static_cast<std::uint64_t>(k));
        StateVec psi;
        if (sample_initial) {
          std::vector<double> w;
          for (auto& [idx, p] : mixture) w.push_back(p);
          int pick = mixture.size() == 1 ? 0 : rng.pick(w, 1.0);
          psi = StateVec::Zero(model.dim);
          psi[mixture[pick].first] = 1.0;
        } else {
          psi = psi0;
          psi /= psi.norm();
        }
        out.records[k] = evolve_single_trajectory(model, std::move(psi), t_end, rng, opts,
                                                  out.times, cav.data(), exc.data(), f1.data(),
                                                  f2.data());
        for (std::size_t i = 0; i < ng; ++i) {
          bs.sum_cav[i] += cav[i];
          bs.sq_cav[i] += cav[i] * cav[i];
          bs.sum_exc[i] += exc[i];
          bs.sq_exc[i] += exc[i] * exc[i];
          bs.sum_f1[i] += f1[i];
          bs.sum_f2[i] += f2[i];
        }
        for (const auto& j : out.records[k].jumps) bs.jumps[j.channel] += 1.0;
      }
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  int jobs = opts.jobs > 0 ? opts.jobs
                           : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<int>(jobs, n_blocks);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);

  out.mean_cavity.assign(ng, 0.0);
  out.se_cavity.assign(ng, 0.0);
  out.mean_excited.assign(ng, 0.0);
  out.se_excited.assign(ng, 0.0);
  out.mean_f1.assign(ng, 0.0);
  out.mean_f2.assign(ng, 0.0);
  out.mean_channel_jumps.assign(model.channels.size(), 0.0);

  std::vector<double> sq_cav(ng, 0.0), sq_exc(ng, 0.0);
  for (const auto& bs : blocks) {
    for (std::size_t i = 0; i < ng; ++i) {
      out.mean_cavity[i] += bs.sum_cav[i];
      sq_cav[i] += bs.sq_cav[i];
      out.mean_excited[i] += bs.sum_exc[i];
      sq_exc[i] += bs.sq_exc[i];
      out.mean_f1[i] += bs.sum_f1[i];
      out.mean_f2[i] += bs.sum_f2[i];
    }
    for (std::size_t c = 0; c < bs.jumps.size(); ++c) out.mean_channel_jumps[c] += bs.jumps[c];
  }
  const double n = static_cast<double>(n_traj);
  for (std::size_t i = 0; i < ng; ++i) {
    out.mean_cavity[i] /= n;
    out.mean_excited[i] /= n;
    out.mean_f1[i] /= n;
    out.mean_f2[i] /= n;
    if (n_traj > 1) {
      double var_c = std::max(0.0, (sq_cav[i] - n * out.mean_cavity[i] * out.mean_cavity[i]) /
                                       (n - 1.0));
      double var_e = std::max(0.0, (sq_exc[i] - n * out.mean_excited[i] * out.mean_excited[i]) /
                                       (n - 1.0));
      out.se_cavity[i] = std::sqrt(var_c / n);
      out.se_excited[i] = std::sqrt(var_e / n);
    }
  }
  for (auto& j : out.mean_channel_jumps) j /= n;
  return out;
}

/// Monte Carlo ensemble from the model's configured initial state (mixtures
/// are sampled per trajectory).
inline EnsembleResult evolve_trajectories(const LindbladModel& model, double t_end, int n_traj,
                                          std::uint64_t seed,
                                          const TrajectoryOptions& opts = {}) {
  return evolve_trajectories(model, StateVec(), t_end, n_traj, seed, opts);
}

/// Emission budget from jump statistics: per-channel jump counts per attempt
/// plus the residual populations of the final collapsed atomic states.
inline EmissionBudget emission_budget(const EnsembleResult& ens) {
  EmissionBudget b;
  for (std::size_t k = 0; k < ens.channels.size(); ++k) {
    if (ens.channels[k].type == CollapseChannel::Type::CavityDecay) {
      b.eta_cavity += ens.mean_channel_jumps[k];
    } else if (ens.channels[k].target == Manifold::GroundF1) {
      b.free_space_f1 += ens.mean_channel_jumps[k];
    } else {
      b.free_space_f2 += ens.mean_channel_jumps[k];
    }
  }
  for (const auto& rec : ens.records) {
    for (int mf = -1; mf <= 1; ++mf)
      b.residual_f1_population +=
          rec.final_atomic_populations[atomic_index(Manifold::GroundF1, mf)];
    for (int mf = -2; mf <= 2; ++mf)
      b.residual_f2_population +=
          rec.final_atomic_populations[atomic_index(Manifold::GroundF2, mf)];
  }
  if (!ens.records.empty()) {
    b.residual_f1_population /= static_cast<double>(ens.records.size());
    b.residual_f2_population /= static_cast<double>(ens.records.size());
  }
  double total = b.eta_cavity + b.free_space_total();
  if (total > 0.0) b.purcell_fraction = b.eta_cavity / total;
  return b;
}

}  // namespace vstirap
