#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "fractrack/kernels.hpp"

namespace fractrack::kernels {

namespace {

constexpr KernelTable kScalar{Isa::scalar, scalar::dot, scalar::axpy,
                              scalar::causal_convolution, scalar::anticausal_correlation};
constexpr KernelTable kAvx2{Isa::avx2, avx2::dot, avx2::axpy, avx2::causal_convolution,
                            avx2::anticausal_correlation};
constexpr KernelTable kNeon{Isa::neon, neon::dot, neon::axpy, neon::causal_convolution,
                            neon::anticausal_correlation};

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* best_available() {
  if (const char* env = std::getenv("FRACTRACK_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && available(Isa::avx2)) return &kAvx2;
    if (want == "neon" && available(Isa::neon)) return &kNeon;
  }
  if (available(Isa::avx2)) return &kAvx2;
  if (available(Isa::neon)) return &kNeon;
  return &kScalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{best_available()};
  return slot;
}

}  // namespace

bool available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(__i386__)) && defined(__GNUC__)
      return cpu_has_avx2();
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__) && defined(__ARM_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw std::invalid_argument("kernel variant not available on this CPU");
  switch (isa) {
    case Isa::avx2:
      return kAvx2;
    case Isa::neon:
      return kNeon;
    case Isa::scalar:
      break;
  }
  return kScalar;
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void set_isa(Isa isa) { active_slot().store(&table(isa), std::memory_order_release); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

}  // namespace fractrack::kernels
