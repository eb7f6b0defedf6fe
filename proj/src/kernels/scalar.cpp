#include <cmath>
#include <limits>

#include "fluidnet/kernels.hpp"

namespace fluidnet::kernels::scalar {
namespace {

void accumulate_abs_diff(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += std::fabs(a[i] - b[i]);
}

void accumulate_abs(const double* a, double* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += std::fabs(a[i]);
}

double max_value(const double* a, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

double trapezoid(const double* t, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += 0.5 * (t[i + 1] - t[i]) * (y[i] + y[i + 1]);
  return s;
}

double max_ratio(const double* num, const double* den, std::size_t n, double min_den) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (den[i] > min_den) {
      const double r = num[i] / den[i];
      m = r > m ? r : m;
    }
  }
  return m;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

}  // namespace

const KernelTable kTable{accumulate_abs_diff, accumulate_abs, max_value, trapezoid, max_ratio, axpy};

}  // namespace fluidnet::kernels::scalar
