#include <catch2/catch_amalgamated.hpp>

#include "vstirap/sweeps.hpp"

using namespace vstirap;

namespace {

SweepSpec small_coupling_spec() {
  SweepSpec s;
  s.axis = SweepAxis::CouplingG;
  s.base = SystemParams::defaults(Line::D2);
  s.base.n_max = 1;
  s.pulse = PulseProfile::linear_ramp(3.0, angular_from_mhz(10.0));
  s.omega_per_coupling = 1.5;
  for (double v : {1.0, 2.3, 5.1, 12.0, 20.0}) s.values.push_back(angular_from_mhz(v));
  return s;
}

}  // namespace

TEST_CASE("grids", "[sweeps]") {
  auto lin = linear_grid(0.0, 1.0, 5);
  CHECK(lin == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  auto lg = log_grid(1.0, 100.0, 3);
  CHECK_THAT(lg[1], Catch::Matchers::WithinRel(10.0, 1e-12));
  auto m = with_markers({1.0, 3.0}, {2.0, 3.0});
  CHECK(m == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("sweep results keep input order and are bit-reproducible", "[sweeps]") {
  auto spec = small_coupling_spec();
  spec.jobs = 2;
  auto a = run_sweep(spec);
  auto b = run_sweep(spec);
  REQUIRE(a.points.size() == spec.values.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].value == spec.values[i]);
    CHECK(a.points[i].eta == b.points[i].eta);  // bit-identical
    CHECK_FALSE(a.points[i].failed);
  }
}

TEST_CASE("efficiency increases monotonically with coupling", "[sweeps]") {
  auto res = sweep_coupling(small_coupling_spec());
  for (std::size_t i = 1; i < res.points.size(); ++i)
    CHECK(res.points[i].eta > res.points[i - 1].eta);
  CHECK(res.points.back().eta > 0.95);
}

TEST_CASE("a failing point is flagged and the sweep continues", "[sweeps]") {
  auto spec = small_coupling_spec();
  spec.values.insert(spec.values.begin(), -1.0);  // invalid coupling
  auto res = run_sweep(spec);
  CHECK(res.points.front().failed);
  CHECK_FALSE(res.points.front().error.empty());
  for (std::size_t i = 1; i < res.points.size(); ++i) CHECK_FALSE(res.points[i].failed);
}

TEST_CASE("sweep specs are validated", "[sweeps]") {
  auto spec = small_coupling_spec();
  spec.values = {2.0, 1.0};
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  spec.values = {};
  CHECK_THROWS_AS(run_sweep(spec), std::invalid_argument);
  CHECK_THROWS_AS(sweep_omega(small_coupling_spec()), std::invalid_argument);
}

TEST_CASE("zero-detuning point equals the matching drive-scan point", "[sweeps]") {
  SweepSpec omega = presets::omega_scan(Line::D2, 5);
  omega.base.n_max = 1;
  omega.values = {angular_from_mhz(26.0)};
  SweepSpec delta = presets::delta_scan(Line::D2, 3, 50.0);
  delta.base.n_max = 1;
  delta.values = {angular_from_mhz(-10.0), 0.0, angular_from_mhz(10.0)};
  // identical configurations must give bit-identical efficiencies
  auto eo = run_sweep(omega);
  auto ed = run_sweep(delta);
  CHECK(eo.points[0].eta == ed.points[1].eta);
}

TEST_CASE("wavepacket family is deterministic with decreasing widths", "[sweeps]") {
  auto spec = presets::tunability_family();
  spec.base.n_max = 1;
  spec.values = {angular_from_mhz(4.0), angular_from_mhz(10.0), angular_from_mhz(30.0)};
  auto fam1 = wavepacket_family(spec);
  auto fam2 = wavepacket_family(spec);
  REQUIRE(fam1.size() == 3);
  for (std::size_t i = 0; i < fam1.size(); ++i) {
    CHECK(fam1[i].total == fam2[i].total);
    REQUIRE(fam1[i].flux.size() == fam2[i].flux.size());
    CHECK(fam1[i].flux == fam2[i].flux);
  }
  CHECK(fwhm(fam1[0]) > fwhm(fam1[1]));
  CHECK(fwhm(fam1[1]) > fwhm(fam1[2]));
  // efficiency stays on the plateau across the family
  double lo = 1.0, hi = 0.0;
  for (const auto& wp : fam1) {
    lo = std::min(lo, wp.total);
    hi = std::max(hi, wp.total);
  }
  CHECK(hi - lo < 0.02);
}

TEST_CASE("omega floor tracks the swept coupling", "[sweeps]") {
  // with omega_per_coupling the large-g point uses a stronger drive
  auto spec = small_coupling_spec();
  spec.values = {angular_from_mhz(20.0)};
  auto with = run_sweep(spec);
  spec.omega_per_coupling = 0.0;
  auto without = run_sweep(spec);
  CHECK(with.points[0].eta > without.points[0].eta);
  CHECK(with.points[0].eta > 0.95);
}
