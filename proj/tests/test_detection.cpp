#include <catch2/catch_amalgamated.hpp>

#include "vstirap/detection.hpp"
#include "vstirap/rng.hpp"
#include "vstirap/simulation.hpp"

using namespace vstirap;

namespace {

Wavepacket test_packet() {
  // a smooth bump over [0, 2] us
  Wavepacket wp;
  for (int i = 0; i <= 400; ++i) {
    double t = i * 0.005;
    wp.times.push_back(t);
    wp.flux.push_back(t * std::exp(-2.0 * t));
  }
  return wp;
}

DetectionChain d2_chain() {
  DetectionChain c;
  c.directionality = 0.89;
  c.path_transmission = 0.625;
  c.quantum_efficiency = 0.278 / (0.89 * 0.625);
  c.repetition_rate = 1e4;
  c.attempt_window = 8e-6;
  return c;
}

ClickStream poisson_pair(double rate, double duration, std::uint64_t seed) {
  ClickStream s;
  s.duration = duration;
  s.repetition_period = 1e-4;
  for (int d = 0; d < 2; ++d) {
    Philox rng(seed, static_cast<std::uint64_t>(d));
    double t = rng.exponential(rate);
    while (t < duration) {
      s.clicks[d].push_back(t);
      t += rng.exponential(rate);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("chain efficiency is the plain product of its factors", "[detection]") {
  DetectionChain unit;
  unit.directionality = unit.path_transmission = unit.quantum_efficiency = 1.0;
  CHECK(chain_efficiency(unit) == 1.0);

  auto d2 = d2_chain();
  CHECK(chain_efficiency(d2) ==
        d2.directionality * d2.path_transmission * d2.quantum_efficiency);
  CHECK_THAT(chain_efficiency(d2), Catch::Matchers::WithinAbs(0.278, 1e-14));

  auto d1 = d2;
  d1.quantum_efficiency = 0.16 / (0.89 * 0.625);
  CHECK_THAT(chain_efficiency(d1), Catch::Matchers::WithinAbs(0.16, 1e-14));

  // multiplicative and order-independent
  DetectionChain swapped = d2;
  std::swap(swapped.directionality, swapped.quantum_efficiency);
  CHECK_THAT(chain_efficiency(swapped),
             Catch::Matchers::WithinRel(chain_efficiency(d2), 1e-15));
}

TEST_CASE("chain validation", "[detection]") {
  auto c = d2_chain();
  CHECK(c.validate().empty());
  c.directionality = 1.2;
  CHECK_FALSE(c.validate().empty());
  c = d2_chain();
  c.attempt_window = 2e-4;  // exceeds the repetition period
  CHECK_FALSE(c.validate().empty());
  c = d2_chain();
  c.dark_count_rate = -1.0;
  CHECK_FALSE(c.validate().empty());
}

TEST_CASE("no photons and no darks give empty streams", "[detection]") {
  auto s = synthesize_clicks(test_packet(), 0.0, d2_chain(), 1000, 1);
  CHECK(s.clicks[0].empty());
  CHECK(s.clicks[1].empty());
}

TEST_CASE("a lossless chain clicks exactly once per attempt", "[detection]") {
  DetectionChain lossless;
  lossless.directionality = lossless.path_transmission = lossless.quantum_efficiency = 1.0;
  lossless.repetition_rate = 1e4;
  lossless.attempt_window = 8e-6;
  const std::int64_t n = 20000;
  auto s = synthesize_clicks(test_packet(), 1.0, lossless, n, 3);
  auto total = s.clicks[0].size() + s.clicks[1].size();
  CHECK(total == static_cast<std::size_t>(n));
  // fair splitting within 4 sigma
  double half = 0.5 * static_cast<double>(n);
  CHECK(std::abs(static_cast<double>(s.clicks[0].size()) - half) <
        4.0 * std::sqrt(0.25 * n));
  // all clicks inside their attempt windows, strictly increasing per detector
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 1; i < s.clicks[d].size(); ++i)
      CHECK(s.clicks[d][i] > s.clicks[d][i - 1]);
}

TEST_CASE("click rate converges to eta times the chain efficiency", "[detection]") {
  const double eta = 0.87;
  const std::int64_t n = 100000;
  auto chain = d2_chain();
  auto s = synthesize_clicks(test_packet(), eta, chain, n, 5);
  double p = eta * chain_efficiency(chain);
  double got = static_cast<double>(s.clicks[0].size() + s.clicks[1].size()) /
               static_cast<double>(n);
  double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  CHECK(std::abs(got - p) < 3.0 * sigma);
}

TEST_CASE("streams are reproducible for a fixed seed", "[detection]") {
  auto a = synthesize_clicks(test_packet(), 0.5, d2_chain(), 5000, 11);
  auto b = synthesize_clicks(test_packet(), 0.5, d2_chain(), 5000, 11);
  CHECK(a.clicks[0] == b.clicks[0]);
  CHECK(a.clicks[1] == b.clicks[1]);
  auto c = synthesize_clicks(test_packet(), 0.5, d2_chain(), 5000, 12);
  CHECK(a.clicks[0] != c.clicks[0]);
}

TEST_CASE("an ideal single-photon stream has zero central coincidences",
          "[detection]") {
  auto chain = d2_chain();
  chain.dark_count_rate = 0.0;
  auto s = synthesize_clicks(test_packet(), 0.9, chain, 50000, 21);
  auto h = g2_histogram(s, 1e-6, 4.5e-4);
  CHECK(h.g2_zero == 0.0);
  // side peaks present and mutually consistent
  CHECK(h.normalization > 0.0);
  CHECK(h.side_peak_rel_error < 0.2);
}

TEST_CASE("a stationary Poisson pair is flat at g2 = 1", "[detection]") {
  auto s = poisson_pair(2000.0, 30.0, 2);
  auto h = g2_histogram(s, 1e-6, 4.5e-4);
  CHECK_THAT(h.g2_zero, Catch::Matchers::WithinAbs(1.0, 0.05));
  double mean_bins = 0.0;
  for (double v : h.g2) mean_bins += v;
  mean_bins /= static_cast<double>(h.g2.size());
  CHECK_THAT(mean_bins, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("dark counts calibrated to the two-percent background", "[detection]") {
  const double eta = 0.8743;
  auto chain = d2_chain();
  double p_detect = eta * chain_efficiency(chain);
  double q = 0.5 * p_detect;
  // per-window dark mean mu solving (2 q mu + mu^2) = 0.02 (q + mu)^2
  double mu = q * (-1.96 + std::sqrt(1.96 * 1.96 + 4.0 * 0.98 * 0.02)) / (2.0 * 0.98);
  chain.dark_count_rate = mu * chain.repetition_rate;
  auto s = synthesize_clicks(test_packet(), eta, chain, 100000, 31);
  auto h = g2_histogram(s, 1e-6, 4.5e-4);
  CHECK_THAT(h.g2_zero, Catch::Matchers::WithinAbs(0.02, 0.01));
}

TEST_CASE("histogram input validation", "[detection]") {
  ClickStream empty;
  empty.duration = 1.0;
  empty.repetition_period = 1e-4;
  CHECK_THROWS_AS(g2_histogram(empty, 1e-6, 1e-3), std::domain_error);
  auto s = poisson_pair(1000.0, 1.0, 9);
  CHECK_THROWS_AS(g2_histogram(s, -1.0, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(g2_histogram(s, 1e-6, 2e-5), std::invalid_argument);  // no side peak
}
