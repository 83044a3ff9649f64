#include "facelve/random.hpp"

#include <cmath>
#include <numbers>

#include "facelve/error.hpp"

namespace facelve {

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

RandomStream RandomStream::restore(std::uint64_t seed, std::uint64_t position) {
  RandomStream stream(seed);
  stream.engine_.discard(position);
  stream.position_ = position;
  return stream;
}

std::uint64_t RandomStream::next_u64() {
  ++position_;
  return engine_();
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  // 1 - uniform() lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw Error(ErrorCode::OutOfRange, "uniform_index: empty range");
  // Rejection keeps the draw unbiased for any n.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double RandomStream::sign() { return (next_u64() >> 63) != 0 ? 1.0 : -1.0; }

}  // namespace facelve
