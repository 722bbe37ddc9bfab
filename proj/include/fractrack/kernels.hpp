#pragma once

// Data-parallel inner loops used by the solvers. Each kernel has a scalar
// reference implementation and vectorized variants (AVX2+FMA on x86-64,
// NEON on AArch64). The variant is chosen once at startup from the CPU
// features and can be overridden with FRACTRACK_ISA=scalar|avx2|neon or
// programmatically through set_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace fractrack::kernels {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = sum_{j<i} w[i-j] * u[j] for i in [1, n]; out[0] = 0.
  // `w_rev` holds w reversed: w_rev[p] = w[n - p], length n + 1.
  void (*causal_convolution)(const double* w_rev, const double* u, double* out,
                             std::size_t n);
  // out[j] = sum_{i=j+1}^{n} w[i-j] * v[i] for j in [0, n); `w` has length n + 1.
  void (*anticausal_correlation)(const double* w, const double* v, double* out,
                                 std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n);
void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n);
void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n);
}  // namespace avx2

namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void causal_convolution(const double* w_rev, const double* u, double* out, std::size_t n);
void anticausal_correlation(const double* w, const double* v, double* out, std::size_t n);
}  // namespace neon

// True if the variant was compiled in and the running CPU supports it.
bool available(Isa isa);

const KernelTable& table(Isa isa);

// The table used by the library.
const KernelTable& active();

// Switches the active table. Throws std::invalid_argument if unavailable.
void set_isa(Isa isa);

std::string_view isa_name(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size() < y.size() ? x.size() : y.size());
}

}  // namespace fractrack::kernels
