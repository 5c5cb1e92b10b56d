#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace senssolve {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// Uniform double in [0, 1) from the top 53 bits of a 64-bit word.
inline double to_unit_interval(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// One uniform for the stream (seed, a, b). Used where each (stratum, draw)
// cell needs exactly one variate independent of evaluation order.
double stream_uniform(std::uint64_t seed, std::uint32_t a, std::uint32_t b);

// Sequential UniformRandomBitGenerator over a fixed (seed, stream) pair.
// Distinct streams never share counter blocks.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  PhiloxEngine(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  double uniform() { return to_unit_interval((*this)()); }

 private:
  void refill();

  PhiloxKey key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
};

// Mixes two indices into one stream id (replicate, purpose).
constexpr std::uint64_t stream_id(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

}  // namespace senssolve
