#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace gigan {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The stream is fully determined by a 64-bit seed and a 64-bit stream id:
/// key = (seed_lo, seed_hi), counter = (block_lo, block_hi, stream_lo,
/// stream_hi) with the block index incremented per 4-word output block.
/// Words are consumed in order x0..x3. Derived draws are defined on top of
/// the word stream so other implementations can reproduce them exactly:
///
///   next_u64     = (w0 << 32) | w1            (two consecutive words)
///   uniform      = (next_u64 >> 11) * 2^-53    in [0, 1)
///   uniform_open = ((next_u64 >> 11) + 0.5) * 2^-53   in (0, 1)
///   normal       = Box-Muller cos branch from (uniform_open, uniform_open),
///                  one normal per pair (no caching)
///   gamma(a)     = Marsaglia-Tsang; a < 1 via gamma(a+1) * u^(1/a)
///   index(n)     = floor(uniform * n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  double uniform() noexcept;
  double uniform_open() noexcept;
  double normal() noexcept;
  double normal(double mean, double stddev) noexcept { return mean + stddev * normal(); }
  double gamma(double shape) noexcept;
  double gumbel() noexcept;
  std::size_t index(std::size_t n) noexcept;

  /// Fisher-Yates from the back using index(i + 1).
  template <typename T>
  void shuffle(std::span<T> items) noexcept {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Child generator for an independent sub-stream, derived from this
  /// generator's key and the given tag.
  [[nodiscard]] Rng fork(std::uint64_t tag) const noexcept;

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

  /// One Philox4x32-10 block for an explicit counter and key.
  static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                            std::array<std::uint32_t, 2> key) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

/// Deterministic seed mixing (SplitMix64 finalizer) for deriving per-run seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace gigan
