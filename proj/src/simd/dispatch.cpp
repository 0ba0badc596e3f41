#include "jdcev/simd/kernels.hpp"

#include "jdcev/error.hpp"

#include <cstdlib>
#include <string>

namespace jdcev::simd {

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::avx2 ? "avx2" : "scalar";
}

bool supported(Isa isa) noexcept {
    if (isa == Isa::scalar) return true;
#if defined(JDCEV_HAVE_AVX2)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& kernels(Isa isa) {
    require(supported(isa), ErrorCategory::domain,
            "kernel variant " + std::string(to_string(isa)) + " is not available");
#if defined(JDCEV_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

const KernelTable& active_kernels() {
    static const KernelTable& table = [] () -> const KernelTable& {
        const char* env = std::getenv("JDCEV_SIMD");
        if (env != nullptr && std::string_view(env) == "scalar") return kernels(Isa::scalar);
        if (env != nullptr && std::string_view(env) == "avx2") return kernels(Isa::avx2);
        return supported(Isa::avx2) ? kernels(Isa::avx2) : kernels(Isa::scalar);
    }();
    return table;
}

} // namespace jdcev::simd
