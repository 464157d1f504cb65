#include <catch2/catch_amalgamated.hpp>

#include "vstirap/observables.hpp"
#include "vstirap/simulation.hpp"

using namespace vstirap;

namespace {

// Composite Simpson on the recorded (uniform) grid; trapezoid on a trailing
// odd interval. Used as the independent grid-level quadrature.
double integrate_series(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  std::size_t i = 0;
  for (; i + 2 < t.size(); i += 2) {
    double h1 = t[i + 1] - t[i], h2 = t[i + 2] - t[i + 1];
    if (std::abs(h1 - h2) < 1e-9 * h1) {
      s += (h1 + h2) / 6.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    } else {
      s += 0.5 * h1 * (f[i] + f[i + 1]) + 0.5 * h2 * (f[i + 1] + f[i + 2]);
    }
  }
  for (; i + 1 < t.size(); ++i) s += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  return s;
}

Trajectory decay_run(double kappa) {
  auto p = SystemParams::defaults(Line::D2);
  p.n_max = 1;
  p.kappa = kappa;
  auto pulse = PulseProfile::linear_ramp(1e-3, 0.0);
  auto model = build_model(p, pulse);
  // one photon in the cavity with the atom parked in |2,+2>, which couples to
  // neither the cavity nor the (absent) drive: pure field decay.
  DenseOp rho0 = DenseOp::Zero(model.dim, model.dim);
  int per_mode = p.n_max + 1;
  rho0(atomic_index(Manifold::GroundF2, 2) * per_mode + 1,
       atomic_index(Manifold::GroundF2, 2) * per_mode + 1) = 1.0;
  MasterOptions opts;
  opts.dt_out = 0.002;
  opts.quiet = QuietStop{1e-6, 10.0};
  return evolve_master(model, rho0, 1.0, opts);
}

}  // namespace

TEST_CASE("vanishing coupling gives vanishing efficiency", "[observables]") {
  auto p = SystemParams::defaults(Line::D2);
  p.n_max = 1;
  p.coupling_scale = 1e-9;
  auto pulse = PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0));
  auto eff = generation_efficiency(p, pulse);
  CHECK(eff.value >= 0.0);
  CHECK(eff.value < 1e-10);
}

TEST_CASE("no drive gives an identically zero wave packet", "[observables]") {
  auto p = SystemParams::defaults(Line::D2);
  p.n_max = 1;
  auto traj = run_generation(p, PulseProfile::linear_ramp(3.0, 0.0));
  auto wp = wavepacket(traj);
  for (double v : wp.flux) CHECK(std::abs(v) < 1e-14);
  CHECK(efficiency(traj).value < 1e-14);
  CHECK_THROWS_AS(fwhm(wp), std::domain_error);
}

TEST_CASE("cavity decay wave packet is the analytic exponential", "[observables]") {
  double kappa = angular_from_mhz(2.8);
  auto traj = decay_run(kappa);
  auto wp = wavepacket(traj);
  for (std::size_t i = 0; i < wp.times.size(); ++i) {
    double expected = 2.0 * kappa * std::exp(-2.0 * kappa * wp.times[i]);
    CHECK_THAT(wp.flux[i], Catch::Matchers::WithinAbs(expected, 1e-6 * 2.0 * kappa));
  }
  // single-sided width of the exponential
  CHECK_THAT(fwhm(wp), Catch::Matchers::WithinRel(std::log(2.0) / (2.0 * kappa), 1e-3));
  // budget: everything leaves through the cavity
  auto model = build_model(traj.params, traj.pulse);
  auto b = emission_budget(traj, model);
  CHECK_THAT(b.eta_cavity, Catch::Matchers::WithinAbs(1.0, 2e-6));
  CHECK(b.free_space_f1 < 1e-12);
  CHECK(b.free_space_f2 < 1e-12);
}

TEST_CASE("wave packet integral equals the efficiency", "[observables]") {
  auto p = SystemParams::defaults(Line::D1);
  p.n_max = 1;
  auto pulse = PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0));
  SolverConfig cfg;
  cfg.output_points = 6000;
  auto traj = run_generation(p, pulse, cfg);
  auto wp = wavepacket(traj);
  double eta = efficiency(traj).value;
  // the recorded cumulative integral is the same quadrature as eta
  CHECK_THAT(wp.cumulative.back(), Catch::Matchers::WithinAbs(eta, 1e-12));
  CHECK_THAT(wp.total, Catch::Matchers::WithinAbs(eta, 1e-12));
  // independent grid-level quadrature agrees to the stated tolerance
  CHECK_THAT(integrate_series(wp.times, wp.flux), Catch::Matchers::WithinAbs(eta, 1e-6));
}

TEST_CASE("free-space emission equals 2 gamma times the excited exposure",
          "[observables]") {
  auto p = SystemParams::defaults(Line::D1);
  p.n_max = 1;
  auto pulse = PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0));
  auto traj = run_generation(p, pulse);
  auto model = build_model(p, pulse);
  auto b = emission_budget(traj, model);
  CHECK_THAT(2.0 * p.gamma * traj.excited_time_integral,
             Catch::Matchers::WithinAbs(b.free_space_total(), 1e-6));
  // grid-level consistency of the excited series with its exact integral
  CHECK_THAT(integrate_series(traj.times, traj.excited_population),
             Catch::Matchers::WithinAbs(traj.excited_time_integral, 1e-5));
}

TEST_CASE("budget closure accounts for the initial population", "[observables]") {
  for (Line line : {Line::D1, Line::D2}) {
    auto p = SystemParams::defaults(line);
    p.n_max = 1;
    auto pulse = PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0));
    auto traj = run_generation(p, pulse);
    auto model = build_model(p, pulse);
    auto b = emission_budget(traj, model);
    // every cavity photon or F1 free-space photon parks the atom in F=1
    CHECK_THAT(b.eta_cavity + b.free_space_f1,
               Catch::Matchers::WithinAbs(b.residual_f1_population, 5e-4));
    CHECK_THAT(b.residual_f1_population + b.residual_f2_population,
               Catch::Matchers::WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("triangular wave packet has half-base width", "[observables]") {
  Wavepacket wp;
  for (int i = 0; i <= 100; ++i) {
    double t = i * 0.01;
    wp.times.push_back(t);
    wp.flux.push_back(t < 0.5 ? t : 1.0 - t);
  }
  CHECK_THAT(fwhm(wp), Catch::Matchers::WithinAbs(0.5, 1e-9));
}

TEST_CASE("emission ordering of the two lines under the standard ramp",
          "[observables]") {
  auto run = [](Line line) {
    auto p = SystemParams::defaults(line);
    p.n_max = 1;
    return run_generation(p, PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0)));
  };
  auto d1 = run(Line::D1);
  auto d2 = run(Line::D2);
  auto peak_time = [](const Trajectory& t) {
    std::size_t ipk = 0;
    for (std::size_t i = 1; i < t.cavity_population.size(); ++i)
      if (t.cavity_population[i] > t.cavity_population[ipk]) ipk = i;
    return t.times[ipk];
  };
  auto peak_excited = [](const Trajectory& t) {
    double m = 0.0;
    for (double v : t.excited_population) m = std::max(m, v);
    return m;
  };
  CHECK(peak_time(d2) > peak_time(d1));
  CHECK(peak_excited(d1) > peak_excited(d2));
}

TEST_CASE("truncated horizon marks the efficiency as a lower bound", "[observables]") {
  auto p = SystemParams::defaults(Line::D2);
  p.n_max = 1;
  // keep the drive on through the horizon cap so the system never goes quiet
  auto pulse = PulseProfile::piecewise(
      {{0.0, 0.0}, {3.0, angular_from_mhz(2.0)}, {3.3, angular_from_mhz(2.0)}});
  SolverConfig cfg;
  cfg.horizon_factor = 1.0;
  auto traj = run_generation(p, pulse, cfg);
  CHECK(traj.truncated_horizon);
  CHECK(efficiency(traj).lower_bound);
  CHECK(wavepacket(traj).lower_bound);
  CHECK(stop_when_quiet(traj) < 0.0);
}
