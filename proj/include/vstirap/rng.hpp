#pragma once

// Counter-based random numbers (Philox-4x32-10). Streams are addressed by
// (seed, stream index), so trajectory ensembles and detection synthesis get
// reproducible substreams independent of execution order.

#include <array>
#include <cmath>
#include <cstdint>

namespace vstirap {

class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint64_t next_u64() {
    if (have_ >= 2) {
      auto block = generate(counter_++);
      lo_ = (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
      hi_ = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
      have_ = 0;
    }
    std::uint64_t v = have_ == 0 ? lo_ : hi_;
    ++have_;
    return v;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  /// Index into cumulative weights; weights need not be normalised.
  template <class Weights>
  int pick(const Weights& w, double total) {
    double r = uniform() * total;
    double acc = 0.0;
    int last = 0;
    for (int i = 0; i < static_cast<int>(w.size()); ++i) {
      acc += w[i];
      last = i;
      if (r < acc) return i;
    }
    return last;
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
  }

  std::array<std::uint32_t, 4> generate(std::uint64_t draw) const {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    std::array<std::uint32_t, 4> x{
        static_cast<std::uint32_t>(draw), static_cast<std::uint32_t>(draw >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    std::uint32_t k0 = key_[0], k1 = key_[1];
    for (int round = 0; round < 10; ++round) {
      std::uint32_t hi0 = mulhi(kM0, x[0]), lo0 = kM0 * x[0];
      std::uint32_t hi1 = mulhi(kM1, x[2]), lo1 = kM1 * x[2];
      x = {hi1 ^ x[1] ^ k0, lo1, hi0 ^ x[3] ^ k1, lo0};
      k0 += kW0;
      k1 += kW1;
    }
    return x;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::uint64_t lo_ = 0, hi_ = 0;
  int have_ = 2;
};

}  // namespace vstirap
