#include "fluidnet/rng.hpp"

#include <cmath>

namespace fluidnet {

std::uint64_t mix64(std::uint64_t x) noexcept {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
  return CounterRng(mix64(key_ ^ mix64(stream + 0x632be59bd9b4e019ULL)));
}

std::uint64_t CounterRng::next_u64() noexcept {
  return mix64(key_ + mix64(counter_++));
}

double CounterRng::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  // Lemire's multiply-shift; bias is < n / 2^64, irrelevant at our sizes.
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

double CounterRng::exponential(double rate) noexcept {
  return -std::log(uniform_open0()) / rate;
}

}  // namespace fluidnet
