#pragma once

#include <cstdint>

namespace fluidnet {

/// Counter-based generator: the n-th draw of stream (key) is a pure function
/// of (key, n), so streams can be split and handed to workers without
/// changing any result.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  /// Independent child stream; split(i) on equal parents yields equal children.
  CounterRng split(std::uint64_t stream) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_open0() noexcept { return 1.0 - uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  double exponential(double rate) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace fluidnet
