#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kuq {

// Names a reproducible random stream. Two handles with the same seed and
// stream always yield identical draw sequences, independent of thread count
// or call ordering elsewhere in the program. Parallel consumers derive
// disjoint substreams via child() instead of sharing a generator.
struct RngHandle {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  RngHandle child(std::uint64_t substream) const noexcept;
};

// Counter-based generator: a Weyl counter advanced by a per-stream odd
// increment, pushed through the SplitMix64 finalizer. The entire state is
// two words, so handles are cheap to fork and replay.
class Rng {
 public:
  explicit Rng(RngHandle handle) noexcept;

  std::uint64_t next_u64() noexcept;

  // Uniform draw in [0, 1) with 53 random bits.
  double next_uniform() noexcept;

  // Standard normal draw, Box-Muller in trigonometric form. The second
  // value of each pair is cached, so draws come in deterministic order.
  double next_gauss() noexcept;

 private:
  std::uint64_t counter_ = 0;
  std::uint64_t increment_ = 1;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Draws `count` values from N(mean, sd^2). Rejects negative sd.
std::vector<double> gauss_sample(RngHandle handle, double mean, double sd,
                                 std::size_t count);

}  // namespace kuq
