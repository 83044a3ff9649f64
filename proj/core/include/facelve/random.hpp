#pragma once

#include <cstdint>
#include <random>

namespace facelve {

/// Seedable deterministic randomness shared by every stochastic operation.
///
/// Backed by std::mt19937_64, whose output sequence is fixed by the standard.
/// Distributions are implemented here rather than through <random>'s
/// distribution classes, which are implementation-defined; that keeps draws
/// identical across standard libraries. State is fully described by
/// (seed, position), where position counts raw 64-bit words consumed.
///
/// A stream is single-owner. Never share one across threads.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed = 0);

  /// Rebuilds a stream that has already consumed `position` words.
  static RandomStream restore(std::uint64_t seed, std::uint64_t position);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; consumes exactly two words.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  /// +1.0 or -1.0 with equal probability.
  double sign();

  friend bool operator==(const RandomStream& a, const RandomStream& b) {
    return a.seed_ == b.seed_ && a.position_ == b.position_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

}  // namespace facelve
