#include "mlpmc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace mlpmc::rng::kernels {

#if defined(MLPMC_HAVE_AVX2)
void fill_u01_avx2(const StreamState& state, std::uint64_t first_slot, double* out,
                   std::size_t n);
void normal_quantile_avx2(double* values, std::size_t n);
#endif

namespace {

using FillFn = void (*)(const StreamState&, std::uint64_t, double*, std::size_t);
using QuantileFn = void (*)(double*, std::size_t);

struct Dispatch {
    FillFn fill = &fill_u01_scalar;
    QuantileFn quantile = &normal_quantile_scalar;
    const char* name = "scalar";
};

bool avx2_available() {
#if defined(MLPMC_HAVE_AVX2) && defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Dispatch make_dispatch(std::string_view request) {
    Dispatch d;
#if defined(MLPMC_HAVE_AVX2)
    const bool want_avx2 = (request == "avx2") || (request != "scalar" && avx2_available());
    if (want_avx2 && avx2_available()) {
        d.fill = &fill_u01_avx2;
        d.quantile = &normal_quantile_avx2;
        d.name = "avx2";
    }
#else
    (void)request;
#endif
    return d;
}

Dispatch& dispatch() {
    static Dispatch d = [] {
        const char* env = std::getenv("MLPMC_KERNEL");
        return make_dispatch(env != nullptr ? std::string_view(env) : "auto");
    }();
    return d;
}

}  // namespace

void fill_u01(const StreamState& state, std::uint64_t first_slot, double* out, std::size_t n) {
    dispatch().fill(state, first_slot, out, n);
}

void normal_quantile(double* values, std::size_t n) { dispatch().quantile(values, n); }

std::string_view active_kernel() { return dispatch().name; }

bool force_kernel(std::string_view name) {
    if (name == "avx2" && !avx2_available()) return false;
    if (name != "avx2" && name != "scalar" && name != "auto") return false;
    dispatch() = make_dispatch(name);
    return true;
}

}  // namespace mlpmc::rng::kernels
