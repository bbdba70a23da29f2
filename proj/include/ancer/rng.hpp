#pragma once
// Counter-based random streams. A stream is identified by (seed, stream id);
// the i-th 64-bit word it produces is a pure function of (seed, id, i), so any
// draw can be reproduced without replaying a shared generator.

#include <cstdint>

namespace ancer {

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform01();
  // Uniform on [-1, 1].
  double uniform_pm1();
  // Standard normal via Box-Muller; the second variate of each pair is kept.
  double normal();
  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Stream id helpers for the pipeline phases that draw noise for a sample.
enum class Phase : std::uint64_t {
  certify = 0,
  optimize_isotropic = 1,
  optimize_ancer = 2,
  reestimate = 3,
  soundness = 4,
  accept = 5,
};

constexpr std::uint64_t stream_id(std::uint64_t sample_index, Phase phase) {
  return sample_index ^ (static_cast<std::uint64_t>(phase) << 56);
}

}  // namespace ancer
