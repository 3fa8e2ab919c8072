#include "kuq/rng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kuq/errors.hpp"

namespace kuq {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer (Stafford mix 13). Bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngHandle RngHandle::child(std::uint64_t substream) const noexcept {
  // Children of distinct substream indices land in distinct streams; the
  // +1 keeps child(0) away from the parent's own stream id.
  return RngHandle{seed, mix64(stream + kGolden * (substream + 1))};
}

Rng::Rng(RngHandle handle) noexcept {
  counter_ = mix64(handle.seed + kGolden) ^ mix64(~handle.stream);
  // Any odd increment makes the counter a full-period Weyl sequence.
  increment_ = mix64(handle.stream + 0x632BE59BD9B4E019ull) | 1ull;
}

std::uint64_t Rng::next_u64() noexcept {
  counter_ += increment_;
  return mix64(counter_);
}

double Rng::next_uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_gauss() noexcept {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  // u1 lies in (0, 1] so the logarithm stays finite.
  const double u1 =
      static_cast<double>((next_u64() >> 11) + 1ull) * 0x1.0p-53;
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::vector<double> gauss_sample(RngHandle handle, double mean, double sd,
                                 std::size_t count) {
  if (sd < 0.0) {
    throw InvalidParameter("gauss_sample: sd must be nonnegative, got " +
                           std::to_string(sd));
  }
  Rng rng(handle);
  std::vector<double> out(count);
  for (double& v : out) {
    v = mean + sd * rng.next_gauss();
  }
  return out;
}

}  // namespace kuq
