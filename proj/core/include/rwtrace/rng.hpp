#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rwtrace {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit key selects an independent stream; the 128-bit counter walks
// through it. Output is a pure function of (key, counter), so a stream can be
// reproduced from its key alone.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key = 0) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (buffered_ == 0) refill();
    return buffer_[--buffered_];
  }

  // Uniform double on [0, 1) from the top 53 bits of one draw.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return 2 * block_ - buffered_; }

 private:
  void refill();

  std::uint64_t key_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

namespace detail {
// One Philox4x32 block with 10 rounds; exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);
}  // namespace detail

// Stream splitting rule. The key for (master, level, replica) is
//   k0 = splitmix64(master)
//   k1 = splitmix64(k0 ^ ((level   + 1) * 0x9E3779B97F4A7C15))
//   k2 = splitmix64(k1 ^ ((replica + 1) * 0xC2B2AE3D27D4EB4F))
// and the generator for that stream is CounterRng(k2).
std::uint64_t derive_stream_key(std::uint64_t master_seed, std::uint64_t level, std::uint64_t replica);

inline CounterRng make_stream(std::uint64_t master_seed, std::uint64_t level, std::uint64_t replica) {
  return CounterRng(derive_stream_key(master_seed, level, replica));
}

}  // namespace rwtrace
