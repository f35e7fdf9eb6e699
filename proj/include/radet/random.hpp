#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace radet {

/// Philox4x32-10 counter-based generator. A stream is identified by a 64-bit
/// key (derived from the master seed) and a 64-bit stream id; the remaining
/// 64 counter bits index blocks within the stream. Any (key, id) pair can be
/// reconstructed independently, which is what makes parallel generation
/// reproducible.
///
/// Satisfies UniformRandomBitGenerator so the standard distributions apply.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  RandomStream(std::uint64_t key, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform() noexcept;
  /// Standard normal, Normal(0, 1).
  double normal();
  /// Gamma with the given shape and scale.
  double gamma(double shape, double scale);

  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Raw Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// SplitMix64 finalizer; used to fold tags and indices into stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream id for (tag, index...) tuples; order-sensitive.
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a, std::uint64_t b = 0,
                        std::uint64_t c = 0) noexcept;

}  // namespace radet
