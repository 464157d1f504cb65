#include <catch2/catch_amalgamated.hpp>

#include "vstirap/config.hpp"

using namespace vstirap;

#ifndef VSTIRAP_SOURCE_DIR
#define VSTIRAP_SOURCE_DIR "."
#endif

TEST_CASE("defaults validate cleanly", "[config]") {
  RunConfig cfg;
  CHECK(cfg.validate().empty());
}

TEST_CASE("the shipped default config parses without violations", "[config]") {
  auto cfg = RunConfig::parse_file(std::string(VSTIRAP_SOURCE_DIR) + "/configs/default.cfg");
  CHECK(cfg.validate().empty());
  CHECK(cfg.line == Line::D2);
  CHECK_THAT(chain_efficiency(cfg.detection_chain()),
             Catch::Matchers::WithinAbs(0.278, 1e-4));
}

TEST_CASE("violations name the offending key", "[config]") {
  auto cfg = RunConfig::parse("[system]\nkappa = -1\n");
  auto v = cfg.validate();
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().find("system.kappa") != std::string::npos);

  cfg = RunConfig::parse("[system]\nn_max = 0\n");
  v = cfg.validate();
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().find("n_max") != std::string::npos);
  CHECK(v.front().find(">= 1") != std::string::npos);
}

TEST_CASE("unknown keys and sections are rejected at parse time", "[config]") {
  CHECK_THROWS_AS(RunConfig::parse("[system]\nkapa = 2.8\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[systems]\nkappa = 2.8\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("kappa = 2.8\n"), ConfigError);      // outside section
  CHECK_THROWS_AS(RunConfig::parse("[system]\nkappa 2.8\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[system]\nkappa = abc\n"), ConfigError);
}

TEST_CASE("units convert from MHz and microseconds", "[config]") {
  auto cfg = RunConfig::parse(
      "[system]\nline = D2\ng_max = 5.1\ndelta = -10\n[pulse]\nkind = power\n"
      "exponent = 0.75\nduration = 3\nomega_max = 26\n");
  auto p = cfg.system_params();
  CHECK_THAT(p.g_max, Catch::Matchers::WithinRel(angular_from_mhz(5.1), 1e-12));
  CHECK_THAT(p.delta, Catch::Matchers::WithinRel(angular_from_mhz(-10.0), 1e-12));
  auto pulse = cfg.pulse_profile();
  CHECK(pulse.kind == PulseProfile::Kind::PowerLaw);
  CHECK_THAT(pulse.omega(3.0), Catch::Matchers::WithinRel(angular_from_mhz(26.0), 1e-12));
}

TEST_CASE("line selection updates the default coupling unless pinned", "[config]") {
  auto cfg = RunConfig::parse("[system]\nline = D1\n");
  CHECK_THAT(cfg.system_params().g_max,
             Catch::Matchers::WithinRel(angular_from_mhz(2.3), 1e-12));
  auto pinned = RunConfig::parse("[system]\ng_max = 4.0\nline = D1\n");
  CHECK_THAT(pinned.system_params().g_max,
             Catch::Matchers::WithinRel(angular_from_mhz(4.0), 1e-12));
}

TEST_CASE("piecewise pulses parse from knot lists", "[config]") {
  auto cfg = RunConfig::parse("[pulse]\nkind = piecewise\nknots = 0:0, 3:10, 15:10\n");
  auto pulse = cfg.pulse_profile();
  CHECK(pulse.kind == PulseProfile::Kind::PiecewiseLinear);
  CHECK(pulse.duration == 15.0);
  CHECK_THAT(pulse.omega(3.0), Catch::Matchers::WithinRel(angular_from_mhz(10.0), 1e-12));
  CHECK_THROWS_AS(RunConfig::parse("[pulse]\nkind = piecewise\nknots = 0;0\n").pulse_profile(),
                  ConfigError);
}

TEST_CASE("overrides replace file values", "[config]") {
  auto cfg = RunConfig::parse("[system]\nkappa = 2.8\n");
  cfg.apply_override("system.kappa=3.1");
  CHECK_THAT(cfg.kappa_mhz, Catch::Matchers::WithinAbs(3.1, 1e-12));
  CHECK_THROWS_AS(cfg.apply_override("system.kappa"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("kappa=1"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("system.unknown=1"), ConfigError);
}

TEST_CASE("sweep section builds the spec", "[config]") {
  auto cfg = RunConfig::parse(
      "[sweep]\naxis = delta\npoints = 5\nmin = -50\nmax = 50\nspacing = linear\n"
      "include = 0\n");
  auto spec = cfg.sweep_spec();
  CHECK(spec.axis == SweepAxis::Delta);
  CHECK(spec.values.size() == 5);  // 0 is already on the grid
  CHECK_THAT(spec.values.front(), Catch::Matchers::WithinRel(angular_from_mhz(-50.0), 1e-12));
  auto bad = RunConfig::parse("[sweep]\nspacing = log\nmin = -1\n");
  CHECK_FALSE(bad.validate().empty());
}

TEST_CASE("resolved lines capture the full configuration", "[config]") {
  RunConfig cfg;
  cfg.apply_override("system.kappa=3.3");
  bool found = false;
  for (const auto& line : cfg.resolved_lines())
    if (line.find("system.kappa = 3.3") != std::string::npos) found = true;
  CHECK(found);
}
