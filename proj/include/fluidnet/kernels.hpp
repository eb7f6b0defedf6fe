#pragma once

// Data-parallel reductions over sampled paths. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant; the variant is
// picked once at startup from CPUID and can be overridden with
// FLUIDNET_SIMD=scalar|avx2 or set_active_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace fluidnet::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  /// acc[i] += |a[i] - b[i]|
  void (*accumulate_abs_diff)(const double* a, const double* b, double* acc, std::size_t n);
  /// acc[i] += |a[i]|
  void (*accumulate_abs)(const double* a, double* acc, std::size_t n);
  /// max_i a[i]; -inf for n == 0
  double (*max_value)(const double* a, std::size_t n);
  /// sum_i (t[i+1]-t[i]) * (y[i]+y[i+1]) / 2
  double (*trapezoid)(const double* t, const double* y, std::size_t n);
  /// max_i num[i]/den[i] over den[i] > min_den; 0 when none qualifies
  double (*max_ratio)(const double* num, const double* den, std::size_t n, double min_den);
  /// y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
};

bool isa_supported(Isa isa) noexcept;
const KernelTable& table(Isa isa);
Isa active_isa() noexcept;
/// Overrides the dispatch choice; throws if the ISA is not supported here.
void set_active_isa(Isa isa);

namespace scalar {
extern const KernelTable kTable;
}
#if defined(FLUIDNET_HAVE_AVX2)
namespace avx2 {
extern const KernelTable kTable;
}
#endif

void accumulate_abs_diff(std::span<const double> a, std::span<const double> b, std::span<double> acc);
void accumulate_abs(std::span<const double> a, std::span<double> acc);
double max_value(std::span<const double> a);
double trapezoid(std::span<const double> t, std::span<const double> y);
double max_ratio(std::span<const double> num, std::span<const double> den, double min_den);
void axpy(double a, std::span<const double> x, std::span<double> y);

}  // namespace fluidnet::kernels
