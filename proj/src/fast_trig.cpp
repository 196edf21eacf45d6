// Built with -ffast-math -fopenmp-simd so glibc exposes its SIMD sin/cos
// variants (max error a few ulp). Keep this file free of anything else.
#include "fast_trig.hpp"

#include <cmath>

namespace superf::detail {

void sincos_array(const double* x, double* s, double* c, std::size_t n) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::sin(x[i]);
    c[i] = std::cos(x[i]);
  }
}

}  // namespace superf::detail
