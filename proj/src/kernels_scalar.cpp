#include <cmath>

#include "kernels_detail.hpp"
#include "mlpmc/kernels.hpp"

namespace mlpmc::rng::kernels {

namespace detail {

double quantile_tail(double u, double q) {
    double r = (q < 0.0) ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        const double s = r - 1.6;
        double num = kC[7];
        for (int i = 6; i >= 0; --i) num = std::fma(num, s, kC[i]);
        double den = kD[7];
        for (int i = 6; i >= 0; --i) den = std::fma(den, s, kD[i]);
        z = num / den;
    } else {
        const double s = r - 5.0;
        double num = kE[7];
        for (int i = 6; i >= 0; --i) num = std::fma(num, s, kE[i]);
        double den = kF[7];
        for (int i = 6; i >= 0; --i) den = std::fma(den, s, kF[i]);
        z = num / den;
    }
    return (q < 0.0) ? -z : z;
}

}  // namespace detail

double normal_quantile_one(double u) {
    const double q = u - 0.5;
    if (std::fabs(q) <= detail::kCentralQ) return detail::quantile_central(q);
    return detail::quantile_tail(u, q);
}

void normal_quantile_scalar(double* values, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) values[i] = normal_quantile_one(values[i]);
}

void fill_u01_scalar(const StreamState& state, std::uint64_t first_slot, double* out,
                     std::size_t n) {
    std::size_t i = 0;
    std::uint64_t slot = first_slot;
    while (i < n) {
        const PhiloxBlock blk = state.block(slot >> 1);
        if ((slot & 1u) == 0 && i + 1 < n) {
            out[i++] = u01_from_bits(join_words(blk.w[0], blk.w[1]));
            out[i++] = u01_from_bits(join_words(blk.w[2], blk.w[3]));
            slot += 2;
        } else {
            const std::uint64_t v = (slot & 1u) == 0 ? join_words(blk.w[0], blk.w[1])
                                                     : join_words(blk.w[2], blk.w[3]);
            out[i++] = u01_from_bits(v);
            ++slot;
        }
    }
}

}  // namespace mlpmc::rng::kernels
