#include "fractrack/kernels.hpp"

namespace fractrack::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n) {
  out[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) out[i] = dot(u, w_rev + (n - i), i);
}

void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = dot(v + j + 1, w + 1, n - j);
}

}  // namespace fractrack::kernels::scalar
