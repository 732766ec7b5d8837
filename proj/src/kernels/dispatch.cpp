#include <atomic>
#include <cstdlib>

#include "pmllab/kernels/kernels.hpp"

namespace pmllab::kernels {

namespace {

Isa detect() {
  const char* env = std::getenv("PMLLAB_FORCE_SCALAR");
  if (env != nullptr && env[0] != '\0' && env[0] != '0') return Isa::scalar;
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& forced() {
  static std::atomic<int> f{-1};
  return f;
}

}  // namespace

bool avx2_supported() {
#if defined(PMLLAB_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

const KernelTable& table(Isa isa) {
#ifdef PMLLAB_HAVE_AVX2
  if (isa == Isa::avx2 && avx2_supported()) return avx2_table();
#endif
  (void)isa;
  return scalar_table();
}

Isa active_isa() {
  const int f = forced().load();
  if (f >= 0) return static_cast<Isa>(f);
  static const Isa best = detect();
  return best;
}

void force_isa(Isa isa) { forced().store(static_cast<int>(isa)); }

const KernelTable& active() { return table(active_isa()); }

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace pmllab::kernels
