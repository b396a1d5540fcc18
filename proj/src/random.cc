#include "dseg/random.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dseg {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t run_id) {
  return mix64(mix64(base_seed) ^ mix64(run_id + 0x9E3779B97F4A7C15ull));
}

CounterStream::CounterStream(std::uint64_t key, std::uint64_t step, StreamTag tag)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
      step_lo_(static_cast<std::uint32_t>(step)),
      step_hi_(static_cast<std::uint32_t>(step >> 32)),
      tag_(static_cast<std::uint32_t>(tag)) {}

void CounterStream::refill() {
  if (block_ > std::numeric_limits<std::uint32_t>::max()) {
    throw std::overflow_error("CounterStream: block counter exhausted");
  }
  const PhiloxCounter out =
      philox4x32({static_cast<std::uint32_t>(block_), tag_, step_lo_, step_hi_}, key_);
  ++block_;
  words_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  words_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  words_left_ = 2;
}

double CounterStream::uniform() {
  if (words_left_ == 0) refill();
  const std::uint64_t w = words_[2 - words_left_--];
  return static_cast<double>(w >> 11) * kTwoPow53Inv;
}

double CounterStream::uniform_open() { return 1.0 - uniform(); }

double CounterStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace dseg
