#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ddsaf {

// Deterministic per-trial random stream. Each (master_seed, trial_index, role)
// triple owns an independent mt19937_64; Gaussian deviates come from a
// hand-rolled Box-Muller transform so sequences are bit-identical across
// platforms (std::normal_distribution is implementation-defined).
//
// Roles keep the sample sequences of one trial decoupled: the system draw,
// the input process, the noise process and the signal-power probe each get
// their own substream, so e.g. changing the iteration count never perturbs
// the generated system.
class TrialStream {
 public:
  enum Role : std::uint32_t {
    kSystem = 0,
    kInput = 1,
    kNoise = 2,
    kPowerProbe = 3,
  };

  TrialStream(std::uint64_t master_seed, std::uint64_t trial_index,
              std::uint32_t role = 0)
      : gen_(mix(master_seed, trial_index, role)) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal deviate (Box-Muller, pairwise with caching).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double variance) { return gaussian() * std::sqrt(variance); }

 private:
  // splitmix64 over the three identifiers; avoids std::seed_seq (whose
  // output is unspecified to be stable across library versions in spirit,
  // and which cannot be reproduced outside C++).
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    auto split = [](std::uint64_t& x) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      return z ^ (z >> 31);
    };
    std::uint64_t s = a;
    std::uint64_t h = split(s);
    s ^= b * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
    h ^= split(s);
    s ^= c * 0xc4ceb9fe1a85ec53ULL + 0xda942042e4dd58b5ULL;
    h ^= split(s);
    return h;
  }

  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ddsaf
