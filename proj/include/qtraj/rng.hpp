#pragma once

// Counter-based random numbers. Every trajectory owns an independent stream
// keyed by its seed, so results do not depend on scheduling or thread count.

#include <array>
#include <cstdint>
#include <string_view>

#include "qtraj/linalg.hpp"

namespace qtraj {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::string_view kName = "philox4x32-10";

  static Counter block(Counter counter, Key key) noexcept;
};

/// Sequential draws from one Philox stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed, std::uint32_t stream_id = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  /// Standard complex Gaussian: real and imaginary parts N(0, 1/2).
  Complex complex_normal() noexcept;

  std::uint64_t blocks_consumed() const noexcept { return block_index_; }

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_id_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Haar-distributed pure state: normalized vector of iid complex Gaussians.
PureStateVector haar_pure_state(std::size_t dim, RandomStream& rng);

}  // namespace qtraj
