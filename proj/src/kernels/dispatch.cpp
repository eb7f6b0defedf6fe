#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string>

#include "fluidnet/error.hpp"
#include "fluidnet/kernels.hpp"

namespace fluidnet::kernels {
namespace {

Isa detect() noexcept {
  Isa best = Isa::Scalar;
  if (isa_supported(Isa::Avx2)) best = Isa::Avx2;
  if (const char* env = std::getenv("FLUIDNET_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Isa::Scalar;
    if (v == "avx2" && isa_supported(Isa::Avx2)) return Isa::Avx2;
  }
  return best;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

const KernelTable& current() { return table(active().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(FLUIDNET_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
#if defined(FLUIDNET_HAVE_AVX2)
  if (isa == Isa::Avx2) return avx2::kTable;
#else
  (void)isa;
#endif
  return scalar::kTable;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw Error(ErrorCode::InvalidArgument, "instruction set not supported: " + std::string(to_string(isa)));
  }
  active().store(isa, std::memory_order_relaxed);
}

void accumulate_abs_diff(std::span<const double> a, std::span<const double> b, std::span<double> acc) {
  assert(a.size() == acc.size() && b.size() == acc.size());
  current().accumulate_abs_diff(a.data(), b.data(), acc.data(), acc.size());
}

void accumulate_abs(std::span<const double> a, std::span<double> acc) {
  assert(a.size() == acc.size());
  current().accumulate_abs(a.data(), acc.data(), acc.size());
}

double max_value(std::span<const double> a) { return current().max_value(a.data(), a.size()); }

double trapezoid(std::span<const double> t, std::span<const double> y) {
  assert(t.size() == y.size());
  return current().trapezoid(t.data(), y.data(), t.size());
}

double max_ratio(std::span<const double> num, std::span<const double> den, double min_den) {
  assert(num.size() == den.size());
  return current().max_ratio(num.data(), den.data(), num.size(), min_den);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  current().axpy(a, x.data(), y.data(), y.size());
}

}  // namespace fluidnet::kernels
