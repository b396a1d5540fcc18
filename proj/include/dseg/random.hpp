#pragma once

#include <array>
#include <cstdint>

namespace dseg {

// Philox4x32-10 block function (Salmon et al., SC'11). Maps (counter, key) to
// 128 pseudo-random bits with no internal state.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t z);

// Seed of run `run_id` under `base_seed`:
//   mix64(mix64(base_seed) ^ mix64(run_id + 0x9E3779B97F4A7C15))
// Reproducible by any implementation that has the SplitMix64 finalizer.
std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t run_id);

// Sub-stream tags. Draws are addressed by (key, step, tag, block) so that the
// stream for a given half-step does not depend on execution order.
enum class StreamTag : std::uint32_t {
  kExplore = 0,
  kUpdate = 1,
  kInit = 2,
  kProblem = 3,
  kMonteCarlo = 4,
};

// Counter-based stream of uniforms and standard normals. Every 128-bit Philox
// block yields two 53-bit uniforms, which Box-Muller turns into two normals.
class CounterStream {
 public:
  CounterStream(std::uint64_t key, std::uint64_t step, StreamTag tag);

  double uniform();          // in [0, 1)
  double uniform_open();     // in (0, 1]
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Blocks consumed so far.
  std::uint64_t blocks() const { return block_; }

 private:
  void refill();

  PhiloxKey key_;
  std::uint32_t step_lo_;
  std::uint32_t step_hi_;
  std::uint32_t tag_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> words_{};
  int words_left_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace dseg
