#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"

namespace sal::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(SAL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& best_available() {
  if (const KernelTable* t = avx2_table()) return *t;
  return scalar_table();
}

const KernelTable* resolve(std::string_view name) {
  if (name == "scalar") return &scalar_table();
  if (name == "avx2") return avx2_table();
  if (name == "auto" || name.empty()) return &best_available();
  return nullptr;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{[] {
    const char* env = std::getenv("SAL_LEARN_KERNEL");
    const KernelTable* t = resolve(env ? std::string_view(env) : std::string_view());
    return t ? t : &scalar_table();
  }()};
  return table;
}

}  // namespace

const KernelTable* avx2_table() {
#if defined(SAL_HAVE_AVX2)
  static const bool supported = cpu_has_avx2_fma();
  return supported ? &detail::avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  const KernelTable* t = resolve(name);
  if (!t) return false;
  current().store(t, std::memory_order_relaxed);
  return true;
}

}  // namespace sal::kernels
