#pragma once

// Counter-based random number generation (Philox4x32-10) and the Brownian
// increment driver built on top of it. Sampling is a pure function of
// (seed, channel, step), so ensemble paths can be evaluated in any order,
// on any number of threads, and still produce identical increments.

#include <array>
#include <cmath>
#include <cstdint>

namespace swave {

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * ctr[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * ctr[2];
  const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
  const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  key[0] += kPhiloxW0;
  key[1] += kPhiloxW1;
}

inline std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                               std::uint64_t ctr_lo,
                                               std::uint64_t ctr_hi) {
  std::array<std::uint32_t, 4> ctr = {
      std::uint32_t(ctr_lo), std::uint32_t(ctr_lo >> 32),
      std::uint32_t(ctr_hi), std::uint32_t(ctr_hi >> 32)};
  std::array<std::uint32_t, 2> k = {std::uint32_t(key),
                                    std::uint32_t(key >> 32)};
  for (int r = 0; r < 10; ++r) philox_round(ctr, k);
  return ctr;
}

// Uniform in (0,1), never exactly 0 or 1.
inline double u01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t x = (std::uint64_t(hi) << 32) | lo;
  return (double(x >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Standard normal deviate keyed by (seed, id, step). Box-Muller on the four
// Philox output lanes; only the cosine branch is used so each (id, step)
// pair maps to exactly one deviate.
inline double counter_normal(std::uint64_t seed, std::uint64_t id,
                             std::uint64_t step) {
  const auto r = detail::philox4x32(seed, id, step);
  const double u1 = detail::u01(r[0], r[1]);
  const double u2 = detail::u01(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925287 * u2);
}

// Brownian increments for the noise channels of one sample path.
// Increments for distinct (channel, step) pairs are independent N(0, dt).
class BrownianDriver {
 public:
  BrownianDriver(std::uint64_t seed, double dt) : seed_(seed), dt_(dt) {}

  // Derive a path-specific driver from a base seed, for ensembles.
  static BrownianDriver for_path(std::uint64_t base_seed, std::uint64_t path,
                                 double dt) {
    return BrownianDriver(detail::splitmix64(base_seed ^ (path * 0x51ED2701ull + 1)), dt);
  }

  double dt() const { return dt_; }
  std::uint64_t seed() const { return seed_; }

  // N(0, dt) increment for one channel at one time step.
  double increment(std::uint64_t channel_key, std::uint64_t step) const {
    return std::sqrt(dt_) * counter_normal(seed_, channel_key, step);
  }

 private:
  std::uint64_t seed_;
  double dt_;
};

}  // namespace swave
