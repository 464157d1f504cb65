#pragma once

// Measurement-chain model: lossy detection of the emitted photons, a
// Hanbury Brown-Twiss splitter onto two counters with dark counts, and the
// pulsed second-order correlation histogram built from the synthesized
// click streams. This module works in SI seconds and Hz; wave packets
// arrive from the solver in microseconds and are converted here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "vstirap/observables.hpp"
#include "vstirap/rng.hpp"

namespace vstirap {

struct DetectionChain {
  double directionality = 0.89;       // photon leaves through the outcoupling mirror
  double path_transmission = 1.0;     // fibre + optics
  double quantum_efficiency = 1.0;    // counter efficiency
  double dark_count_rate = 0.0;       // Hz per detector
  double repetition_rate = 10e3;      // Hz
  double attempt_window = 8e-6;       // s, span of possible photon arrivals

  std::vector<std::string> validate() const {
    std::vector<std::string> v;
    auto prob = [&](double x, const char* name) {
      if (x < 0.0 || x > 1.0) v.push_back(std::string("detection.") + name + " must be in [0, 1]");
    };
    prob(directionality, "directionality");
    prob(path_transmission, "path_transmission");
    prob(quantum_efficiency, "quantum_efficiency");
    if (dark_count_rate < 0.0) v.push_back("detection.dark_count_rate must be >= 0");
    if (repetition_rate <= 0.0) v.push_back("detection.repetition_rate must be > 0");
    if (attempt_window < 0.0) v.push_back("detection.attempt_window must be >= 0");
    if (attempt_window * repetition_rate > 1.0)
      v.push_back("detection.attempt_window must fit within the repetition period");
    return v;
  }
};

/// Probability that a photon present in the cavity produces a click:
/// directionality x path transmission x quantum efficiency.
inline double chain_efficiency(const DetectionChain& c) {
  return c.directionality * c.path_transmission * c.quantum_efficiency;
}

struct ClickStream {
  std::array<std::vector<double>, 2> clicks;  // sorted timestamps per detector, s
  double duration = 0.0;                      // s
  double repetition_period = 0.0;             // s
};

namespace detail {

/// Inverse-CDF sampler over a tabulated flux envelope (times in us).
class WavepacketSampler {
 public:
  explicit WavepacketSampler(const Wavepacket& wp) {
    if (wp.times.size() < 2) throw std::invalid_argument("wave packet needs >= 2 samples");
    times_ = wp.times;
    cdf_.resize(wp.times.size(), 0.0);
    for (std::size_t i = 1; i < wp.times.size(); ++i) {
      double dt = wp.times[i] - wp.times[i - 1];
      cdf_[i] = cdf_[i - 1] + 0.5 * (wp.flux[i] + wp.flux[i - 1]) * dt;
    }
    total_ = cdf_.back();
    if (total_ <= 0.0) flat_ = true;
  }

  /// Arrival offset in seconds from the attempt trigger.
  double sample(double u) const {
    if (flat_) return 0.0;
    double target = u * total_;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
    std::size_t i = std::min<std::size_t>(cdf_.size() - 1, it - cdf_.begin());
    if (i == 0) i = 1;
    double c0 = cdf_[i - 1], c1 = cdf_[i];
    double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
    double t_us = times_[i - 1] + f * (times_[i] - times_[i - 1]);
    return t_us * 1e-6;
  }

 private:
  std::vector<double> times_;
  std::vector<double> cdf_;
  double total_ = 0.0;
  bool flat_ = false;
};

}  // namespace detail

/// Synthesize detector clicks for `n_attempts` repetitions of the photon
/// generation protocol. Each attempt delivers a click with probability
/// eta x chain efficiency at an offset drawn from the wave-packet envelope;
/// the click lands on one of the two HBT detectors with probability 1/2.
/// Independent dark counts are then laid over the full duration of each
/// detector. Deterministic for a given seed.
inline ClickStream synthesize_clicks(const Wavepacket& wp, double eta,
                                     const DetectionChain& chain, std::int64_t n_attempts,
                                     std::uint64_t seed) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("synthesize_clicks: eta in [0,1]");
  if (n_attempts < 1) throw std::invalid_argument("synthesize_clicks: n_attempts >= 1");
  auto violations = chain.validate();
  if (!violations.empty())
    throw std::invalid_argument("synthesize_clicks: " + violations.front());

  const double p_click = eta * chain_efficiency(chain);
  const double period = 1.0 / chain.repetition_rate;
  detail::WavepacketSampler sampler(wp);

  ClickStream out;
  out.repetition_period = period;
  out.duration = static_cast<double>(n_attempts) * period;

  Philox rng(seed, 0);
  for (std::int64_t k = 0; k < n_attempts; ++k) {
    if (rng.uniform() < p_click) {
      double offset = sampler.sample(rng.uniform());
      int detector = rng.uniform() < 0.5 ? 0 : 1;
      out.clicks[detector].push_back(static_cast<double>(k) * period + offset);
    }
  }
  if (chain.dark_count_rate > 0.0) {
    for (int d = 0; d < 2; ++d) {
      Philox dark_rng(seed, 1 + static_cast<std::uint64_t>(d));
      double t = dark_rng.exponential(chain.dark_count_rate);
      while (t < out.duration) {
        out.clicks[d].push_back(t);
        t += dark_rng.exponential(chain.dark_count_rate);
      }
      std::sort(out.clicks[d].begin(), out.clicks[d].end());
    }
  }
  return out;
}

struct CorrelationHistogram {
  std::vector<double> bin_edges;  // tau, s
  std::vector<long> counts;       // cross-detector coincidences per bin
  std::vector<double> g2;         // counts normalised to the mean side peak
  double normalization = 0.0;     // expected counts-per-bin at the side peaks
  double g2_zero = 0.0;           // central attempt window mass / side-peak mass
  double side_peak_rel_error = 0.0;  // sampling spread of the side-peak masses
};

/// Cross-correlate the two detectors into bins of width `bin_width` over
/// tau in [-tau_max, tau_max]. Normalisation: the mean coincidence mass in
/// the attempt-spaced windows around tau = +-k/repetition_rate (k >= 1) maps
/// to g2 = 1; the value at zero delay integrates the central window.
inline CorrelationHistogram g2_histogram(const ClickStream& s, double bin_width,
                                         double tau_max) {
  if (s.clicks[0].empty() && s.clicks[1].empty())
    throw std::domain_error("g2_histogram: empty click stream");
  if (bin_width <= 0.0) throw std::invalid_argument("g2_histogram: bin_width must be > 0");
  const double period = s.repetition_period;
  if (period <= 0.0) throw std::invalid_argument("g2_histogram: stream lacks repetition period");
  // Whole bins, symmetric around tau = 0.
  long half_bins = std::lround(std::ceil(tau_max / bin_width));
  long n_bins = 2 * half_bins;
  double lo = -static_cast<double>(half_bins) * bin_width;

  CorrelationHistogram h;
  h.bin_edges.resize(n_bins + 1);
  for (long i = 0; i <= n_bins; ++i) h.bin_edges[i] = lo + i * bin_width;
  h.counts.assign(n_bins, 0);

  // Two-pointer sweep over pairs (t1 on detector 0, t2 on detector 1).
  const auto& d0 = s.clicks[0];
  const auto& d1 = s.clicks[1];
  std::size_t start = 0;
  double window = -lo;
  for (double t1 : d0) {
    while (start < d1.size() && d1[start] < t1 - window) ++start;
    for (std::size_t j = start; j < d1.size() && d1[j] <= t1 + window; ++j) {
      double tau = d1[j] - t1;
      long bin = static_cast<long>(std::floor((tau - lo) / bin_width));
      if (bin >= 0 && bin < n_bins) ++h.counts[bin];
    }
  }

  // Window masses centred on multiples of the repetition period.
  auto window_mass = [&](double centre) {
    double a = centre - 0.5 * period, b = centre + 0.5 * period;
    long m = 0;
    for (long i = 0; i < n_bins; ++i) {
      double mid = 0.5 * (h.bin_edges[i] + h.bin_edges[i + 1]);
      if (mid >= a && mid < b) m += h.counts[i];
    }
    return static_cast<double>(m);
  };

  std::vector<double> side;
  for (int k = 1; k * period + 0.5 * period <= window + 1e-15; ++k) {
    side.push_back(window_mass(k * period));
    side.push_back(window_mass(-k * period));
  }
  if (side.empty()) throw std::invalid_argument("g2_histogram: tau_max spans no side peak");
  double mean_side = 0.0;
  for (double v : side) mean_side += v;
  mean_side /= static_cast<double>(side.size());
  double var = 0.0;
  for (double v : side) var += (v - mean_side) * (v - mean_side);
  var = side.size() > 1 ? var / (static_cast<double>(side.size()) - 1.0) : 0.0;
  h.side_peak_rel_error = mean_side > 0.0 ? std::sqrt(var) / mean_side : 0.0;

  double bins_per_window = period / bin_width;
  h.normalization = mean_side / bins_per_window;  // expected per-bin level
  h.g2.assign(n_bins, 0.0);
  if (h.normalization > 0.0)
    for (long i = 0; i < n_bins; ++i) h.g2[i] = h.counts[i] / h.normalization;
  h.g2_zero = mean_side > 0.0 ? window_mass(0.0) / mean_side : 0.0;
  return h;
}

}  // namespace vstirap
