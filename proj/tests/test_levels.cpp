#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "vstirap/levels.hpp"

using namespace vstirap;

TEST_CASE("basis has 11 states in a fixed, line-independent order", "[levels]") {
  auto b1 = build_basis(Line::D1);
  auto b2 = build_basis(Line::D2);
  REQUIRE(b1.size() == 11);
  for (std::size_t i = 0; i < b1.size(); ++i) {
    CHECK(b1[i] == b2[i]);
    CHECK(atomic_index(b1[i]) == static_cast<int>(i));
  }
  CHECK(atomic_index(Manifold::GroundF1, -1) == 0);
  CHECK(atomic_index(Manifold::GroundF2, 0) == 5);
  CHECK(atomic_index(Manifold::ExcitedF1, 1) == 10);
  CHECK_THROWS_AS(atomic_index(Manifold::GroundF1, 2), std::domain_error);
}

TEST_CASE("selection rule holds over every state pair and polarisation", "[levels]") {
  for (Line line : {Line::D1, Line::D2}) {
    for (const auto& e : build_basis(line)) {
      if (e.manifold != Manifold::ExcitedF1) continue;
      for (const auto& g : build_basis(line)) {
        if (!is_ground(g.manifold)) continue;
        for (int q = -1; q <= 1; ++q) {
          double a = coupling_amplitude(e, g, q, line);
          if (e.mf != g.mf + q) CHECK(a == 0.0);
        }
      }
    }
  }
}

TEST_CASE("squared amplitudes out of each excited state sum to one", "[levels]") {
  for (Line line : {Line::D1, Line::D2}) {
    for (int me = -1; me <= 1; ++me) {
      AtomicState e{Manifold::ExcitedF1, me};
      double sum = 0.0;
      for (const auto& g : build_basis(line)) {
        if (!is_ground(g.manifold)) continue;
        for (int q = -1; q <= 1; ++q) {
          double a = coupling_amplitude(e, g, q, line);
          sum += a * a;
        }
      }
      CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
  }
}

TEST_CASE("hyperfine branching fractions", "[levels]") {
  auto [d2_f1, d2_f2] = hyperfine_branching(Line::D2);
  CHECK_THAT(d2_f1, Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-12));
  CHECK_THAT(d2_f2, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-12));
  auto [d1_f1, d1_f2] = hyperfine_branching(Line::D1);
  CHECK_THAT(d1_f1, Catch::Matchers::WithinAbs(1.0 / 6.0, 1e-12));
  CHECK_THAT(d1_f2, Catch::Matchers::WithinAbs(5.0 / 6.0, 1e-12));
  CHECK_THAT(d1_f1 + d1_f2, Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK_THAT(d2_f1 + d2_f2, Catch::Matchers::WithinAbs(1.0, 1e-14));
}

TEST_CASE("branching equals coupling-table row sums for every excited state", "[levels]") {
  for (Line line : {Line::D1, Line::D2}) {
    auto [bf1, bf2] = hyperfine_branching(line);
    for (int me = -1; me <= 1; ++me) {
      AtomicState e{Manifold::ExcitedF1, me};
      double into_f1 = 0.0, into_f2 = 0.0;
      for (const auto& g : build_basis(line)) {
        if (!is_ground(g.manifold)) continue;
        for (int q = -1; q <= 1; ++q) {
          double a = coupling_amplitude(e, g, q, line);
          (g.manifold == Manifold::GroundF1 ? into_f1 : into_f2) += a * a;
        }
      }
      CHECK_THAT(into_f1, Catch::Matchers::WithinAbs(bf1, 1e-12));
      CHECK_THAT(into_f2, Catch::Matchers::WithinAbs(bf2, 1e-12));
    }
  }
}

TEST_CASE("reduced dipole ratio of the cavity transition is sqrt(5)", "[levels]") {
  CHECK_THAT(reduced_dipole_ratio(Line::D2),
             Catch::Matchers::WithinAbs(std::sqrt(5.0), 1e-12));
  CHECK(reduced_dipole_ratio(Line::D1) == 1.0);
  CHECK_THAT(line_spec(Line::D2).reduced_dipole_ratio,
             Catch::Matchers::WithinAbs(std::sqrt(5.0), 1e-12));
}

TEST_CASE("amplitude spot values", "[levels]") {
  // From the closed-form table: sqrt(branching) x Clebsch-Gordan.
  AtomicState e0{Manifold::ExcitedF1, 0};
  CHECK(coupling_amplitude(e0, {Manifold::GroundF1, 0}, 0, Line::D2) == 0.0);
  CHECK_THAT(coupling_amplitude(e0, {Manifold::GroundF1, -1}, 1, Line::D2),
             Catch::Matchers::WithinAbs(-std::sqrt(15.0) / 6.0, 1e-12));
  CHECK_THAT(coupling_amplitude(e0, {Manifold::GroundF2, 0}, 0, Line::D2),
             Catch::Matchers::WithinAbs(-std::sqrt(15.0) / 15.0, 1e-12));
  CHECK_THAT(coupling_amplitude({Manifold::ExcitedF1, -1}, {Manifold::GroundF2, -2}, 1, Line::D2),
             Catch::Matchers::WithinAbs(std::sqrt(10.0) / 10.0, 1e-12));
  CHECK_THAT(coupling_amplitude(e0, {Manifold::GroundF2, 0}, 0, Line::D1),
             Catch::Matchers::WithinAbs(-1.0 / std::sqrt(3.0), 1e-12));
}

TEST_CASE("invalid manifold combinations are rejected", "[levels]") {
  AtomicState e{Manifold::ExcitedF1, 0};
  AtomicState g{Manifold::GroundF1, 0};
  CHECK_THROWS_AS(coupling_amplitude(g, g, 0, Line::D2), std::domain_error);
  CHECK_THROWS_AS(coupling_amplitude(e, e, 0, Line::D2), std::domain_error);
  CHECK_THROWS_AS(coupling_amplitude(e, g, 2, Line::D2), std::domain_error);
}

TEST_CASE("coupling table dump lists the 15 allowed channels per line", "[levels]") {
  for (Line line : {Line::D1, Line::D2}) {
    std::ostringstream os;
    write_coupling_table(os, line);
    std::istringstream is(os.str());
    std::string row;
    int rows = 0;
    bool header = true;
    while (std::getline(is, row)) {
      if (header) {
        CHECK(row.front() == '#');
        header = false;
        continue;
      }
      ++rows;
    }
    CHECK(rows == 15);
  }
}
