#pragma once

#include <cstddef>

namespace superf::detail {

/// s[i] = sin(x[i]), c[i] = cos(x[i]) through the vectorized libm entry points.
void sincos_array(const double* x, double* s, double* c, std::size_t n);

}  // namespace superf::detail
