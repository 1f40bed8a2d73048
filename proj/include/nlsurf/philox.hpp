#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace nlsurf {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Pure function of
/// (counter, key); parallel streams are obtained by partitioning the counter space.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter apply(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

inline Philox4x32::Key philox_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

// Uniform in (0, 1] from 53 high bits.
inline double u01_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double u01_closed_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Standard normal keyed by (seed, stream, item): one Philox block, Box-Muller cosine branch.
inline double keyed_normal(std::uint64_t seed, std::uint64_t stream, std::uint32_t item,
                           std::uint32_t domain = 0) {
  const auto r = Philox4x32::apply(
      {item, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), domain},
      philox_key(seed));
  const double u1 = u01_open_closed(r[0], r[1]);
  const double u2 = u01_closed_open(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential uniform stream over a private slice of the counter space.
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream_id)
      : key_(philox_key(seed)), stream_(stream_id) {}

  double uniform() {
    if (cached_) {
      cached_ = false;
      return u01_closed_open(block_[2], block_[3]);
    }
    block_ = Philox4x32::apply({static_cast<std::uint32_t>(counter_),
                                static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32) ^ 0x5eed0000u},
                               key_);
    ++counter_;
    cached_ = true;
    return u01_closed_open(block_[0], block_[1]);
  }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  Philox4x32::Counter block_{};
  bool cached_ = false;
};

}  // namespace nlsurf
