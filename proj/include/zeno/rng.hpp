#pragma once

// Counter-based random streams.
//
// Each stream is a Philox4x32-10 block cipher keyed by the 64-bit base
// seed, with the trajectory index and a purpose tag occupying the upper
// half of the 128-bit counter. Streams for different (index, purpose)
// pairs therefore never overlap, and any stream can be constructed in
// O(1) by whichever worker needs it.

#include <array>
#include <cstdint>
#include <limits>

namespace zeno {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  /// The raw 10-round bijection.
  static Counter block(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
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

/// Tags that separate the streams a single trajectory draws from.
enum class StreamPurpose : std::uint32_t {
  Noise = 0,
  Outcomes = 1,
};

/// UniformRandomBitGenerator over one Philox stream. Works with the
/// standard <random> distributions.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t base_seed, std::uint64_t index,
               StreamPurpose purpose = StreamPurpose::Noise)
      : key_{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32)},
        stream_hi_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32) ^
                                                          (static_cast<std::uint32_t>(purpose) << 24)} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 4) refill();
    return buffer_[lane_++];
  }

  /// Identifier recorded on trajectories for provenance.
  std::uint64_t stream_id() const {
    return (std::uint64_t{stream_hi_[1]} << 32) | stream_hi_[0];
  }

 private:
  void refill() {
    const Philox4x32::Counter ctr = {static_cast<std::uint32_t>(block_),
                                     static_cast<std::uint32_t>(block_ >> 32), stream_hi_[0],
                                     stream_hi_[1]};
    buffer_ = Philox4x32::block(ctr, key_);
    ++block_;
    lane_ = 0;
  }

  Philox4x32::Key key_;
  std::array<std::uint32_t, 2> stream_hi_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  int lane_ = 4;
};

}  // namespace zeno
