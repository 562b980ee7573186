#include "modgcn/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace modgcn::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("MODGCN_KERNELS"); env != nullptr && *env != '\0') {
    const Backend requested = parse_backend(env);
    if (available(requested)) return requested;
  }
  return available(Backend::avx2) ? Backend::avx2 : Backend::scalar;
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table(initial_backend())};
  return slot;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    throw std::invalid_argument("kernel backend '" + std::string(backend_name(b)) +
                                "' is not available on this machine");
  }
  return b == Backend::avx2 ? *avx2_table() : scalar_table();
}

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

Backend current_backend() {
  return &active() == &scalar_table() ? Backend::scalar : Backend::avx2;
}

void set_backend(Backend b) { active_slot().store(&table(b), std::memory_order_release); }

Backend parse_backend(std::string_view name) {
  if (name == "scalar") return Backend::scalar;
  if (name == "avx2") return Backend::avx2;
  throw std::invalid_argument("unknown kernel backend '" + std::string(name) + "'");
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

}  // namespace modgcn::kernels
