#include "igaflow/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace igaflow::kernels {

const KernelSet* avx2_set();  // defined in kernels_avx2.cpp (null off-x86)
const KernelSet* neon_set();  // defined in kernels_neon.cpp (null off-arm)

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelSet* select() {
  if (const char* env = std::getenv("IGAFLOW_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_set();
    if (std::strcmp(env, "avx2") == 0 && avx2_set() && cpu_has_avx2())
      return avx2_set();
    if (std::strcmp(env, "neon") == 0 && neon_set()) return neon_set();
    return &scalar_set();  // unknown or unavailable request: safe fallback
  }
  if (avx2_set() && cpu_has_avx2()) return avx2_set();
  if (neon_set()) return neon_set();
  return &scalar_set();
}

}  // namespace

const KernelSet& active() {
  static const KernelSet* chosen = select();
  return *chosen;
}

const KernelSet* get(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &scalar_set();
    case Isa::avx2:
      return cpu_has_avx2() ? avx2_set() : nullptr;
    case Isa::neon:
      return neon_set();
  }
  return nullptr;
}

}  // namespace igaflow::kernels
