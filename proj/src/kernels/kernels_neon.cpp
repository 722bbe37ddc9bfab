#include "fractrack/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace fractrack::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  for (; i + 2 <= n; i += 2) acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n) {
  out[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) out[i] = dot(u, w_rev + (n - i), i);
}

void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = dot(v + j + 1, w + 1, n - j);
}

}  // namespace fractrack::kernels::neon

#else

namespace fractrack::kernels::neon {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n) {
  scalar::causal_convolution(w_rev, u, out, n);
}
void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n) {
  scalar::anticausal_correlation(w, v, out, n);
}
}  // namespace fractrack::kernels::neon

#endif
