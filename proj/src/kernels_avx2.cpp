// AVX2 variants of the uniform-fill and normal-quantile kernels.
// Compiled with -mavx2 -mfma and only reached through the runtime dispatcher.
// Every floating-point element goes through the same operation sequence as
// the scalar reference, so outputs are bit-identical.

#include <immintrin.h>

#include <cmath>

#include "kernels_detail.hpp"
#include "mlpmc/kernels.hpp"

namespace mlpmc::rng::kernels {

namespace philox = ::mlpmc::rng::detail;

namespace {

using detail::kA;
using detail::kB;

inline __m256i mul_hi_lo(__m256i x, __m256i m, __m256i* lo) {
    // 8 parallel 32x32->64 products, split back into hi/lo 32-bit lanes.
    const __m256i pe = _mm256_mul_epu32(x, m);
    const __m256i po = _mm256_mul_epu32(_mm256_srli_epi64(x, 32), m);
    *lo = _mm256_blend_epi32(pe, _mm256_slli_epi64(po, 32), 0xAA);
    return _mm256_blend_epi32(_mm256_srli_epi64(pe, 32), po, 0xAA);
}

// Exact unsigned 53-bit integer (held in a 64-bit lane) -> double.
inline __m256d u53_to_double(__m256i v) {
    const __m256i hi = _mm256_or_si256(_mm256_srli_epi64(v, 32),
                                       _mm256_set1_epi64x(0x4530000000000000LL));
    const __m256i lo = _mm256_or_si256(_mm256_and_si256(v, _mm256_set1_epi64x(0xFFFFFFFFLL)),
                                       _mm256_set1_epi64x(0x4330000000000000LL));
    const __m256d hi_corr =
        _mm256_sub_pd(_mm256_castsi256_pd(hi),
                      _mm256_set1_pd(19342813118337666422669312.0));  // 2^84 + 2^52
    return _mm256_add_pd(hi_corr, _mm256_castsi256_pd(lo));
}

inline __m256d u01_from_bits4(__m256i v) {
    const __m256d x53 = u53_to_double(_mm256_srli_epi64(v, 11));
    return _mm256_mul_pd(_mm256_add_pd(x53, _mm256_set1_pd(0.5)),
                         _mm256_set1_pd(0x1.0p-53));
}

}  // namespace

void fill_u01_avx2(const StreamState& state, std::uint64_t first_slot, double* out,
                   std::size_t n) {
    // Head: align onto a block boundary with the scalar path.
    if ((first_slot & 1u) != 0 && n > 0) {
        fill_u01_scalar(state, first_slot, out, 1);
        ++first_slot;
        ++out;
        --n;
    }

    const __m256i m0 = _mm256_set1_epi32(static_cast<int>(philox::kPhiloxM0));
    const __m256i m1 = _mm256_set1_epi32(static_cast<int>(philox::kPhiloxM1));
    const __m256i w0 = _mm256_set1_epi32(static_cast<int>(philox::kPhiloxW0));
    const __m256i w1 = _mm256_set1_epi32(static_cast<int>(philox::kPhiloxW1));
    const __m256i salt0 = _mm256_set1_epi32(static_cast<int>(state.salt0));
    const __m256i salt1 = _mm256_set1_epi32(static_cast<int>(state.salt1));

    std::uint64_t block = first_slot >> 1;
    while (n >= 16) {
        __m256i x0 = _mm256_setr_epi32(
            static_cast<int>(static_cast<std::uint32_t>(block + 0)),
            static_cast<int>(static_cast<std::uint32_t>(block + 1)),
            static_cast<int>(static_cast<std::uint32_t>(block + 2)),
            static_cast<int>(static_cast<std::uint32_t>(block + 3)),
            static_cast<int>(static_cast<std::uint32_t>(block + 4)),
            static_cast<int>(static_cast<std::uint32_t>(block + 5)),
            static_cast<int>(static_cast<std::uint32_t>(block + 6)),
            static_cast<int>(static_cast<std::uint32_t>(block + 7)));
        __m256i x1 = _mm256_setr_epi32(
            static_cast<int>(static_cast<std::uint32_t>((block + 0) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 1) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 2) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 3) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 4) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 5) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 6) >> 32)),
            static_cast<int>(static_cast<std::uint32_t>((block + 7) >> 32)));
        __m256i x2 = salt0;
        __m256i x3 = salt1;
        __m256i k0 = _mm256_set1_epi32(static_cast<int>(state.key0));
        __m256i k1 = _mm256_set1_epi32(static_cast<int>(state.key1));

        for (int r = 0; r < 10; ++r) {
            __m256i lo0, lo1;
            const __m256i hi0 = mul_hi_lo(x0, m0, &lo0);
            const __m256i hi1 = mul_hi_lo(x2, m1, &lo1);
            x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), k0);
            x1 = lo1;
            x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), k1);
            x3 = lo0;
            k0 = _mm256_add_epi32(k0, w0);
            k1 = _mm256_add_epi32(k1, w1);
        }

        // Per block: va = (w0<<32)|w1 and vb = (w2<<32)|w3.
        const __m256i a_lo = _mm256_unpacklo_epi32(x1, x0);  // va0 va1 | va4 va5
        const __m256i a_hi = _mm256_unpackhi_epi32(x1, x0);  // va2 va3 | va6 va7
        const __m256i b_lo = _mm256_unpacklo_epi32(x3, x2);
        const __m256i b_hi = _mm256_unpackhi_epi32(x3, x2);
        const __m256i va0123 = _mm256_permute2x128_si256(a_lo, a_hi, 0x20);
        const __m256i va4567 = _mm256_permute2x128_si256(a_lo, a_hi, 0x31);
        const __m256i vb0123 = _mm256_permute2x128_si256(b_lo, b_hi, 0x20);
        const __m256i vb4567 = _mm256_permute2x128_si256(b_lo, b_hi, 0x31);

        const __m256d da_lo = u01_from_bits4(va0123);
        const __m256d db_lo = u01_from_bits4(vb0123);
        const __m256d da_hi = u01_from_bits4(va4567);
        const __m256d db_hi = u01_from_bits4(vb4567);

        // Output order matches the scalar fill: (va_i, vb_i) pairs.
        const __m256d p_lo = _mm256_unpacklo_pd(da_lo, db_lo);
        const __m256d q_lo = _mm256_unpackhi_pd(da_lo, db_lo);
        _mm256_storeu_pd(out + 0, _mm256_permute2f128_pd(p_lo, q_lo, 0x20));
        _mm256_storeu_pd(out + 4, _mm256_permute2f128_pd(p_lo, q_lo, 0x31));
        const __m256d p_hi = _mm256_unpacklo_pd(da_hi, db_hi);
        const __m256d q_hi = _mm256_unpackhi_pd(da_hi, db_hi);
        _mm256_storeu_pd(out + 8, _mm256_permute2f128_pd(p_hi, q_hi, 0x20));
        _mm256_storeu_pd(out + 12, _mm256_permute2f128_pd(p_hi, q_hi, 0x31));

        block += 8;
        out += 16;
        n -= 16;
    }

    if (n > 0) fill_u01_scalar(state, block << 1, out, n);
}

namespace {

struct QuantileVec {
    __m256d u;
    __m256d q;
    __m256d central;
    int tails;
};

// One 4-lane central evaluation; the chain is latency-bound, so the caller
// keeps two of these in flight.
inline QuantileVec quantile_central4(const double* src) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d qmax = _mm256_set1_pd(detail::kCentralQ);
    const __m256d rbase = _mm256_set1_pd(detail::kCentralR);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);

    QuantileVec out;
    out.u = _mm256_loadu_pd(src);
    out.q = _mm256_sub_pd(out.u, half);
    const __m256d r = _mm256_fnmadd_pd(out.q, out.q, rbase);

    __m256d num = _mm256_set1_pd(kA[7]);
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[6]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[5]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[4]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[3]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[2]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[1]));
    num = _mm256_fmadd_pd(num, r, _mm256_set1_pd(kA[0]));
    __m256d den = _mm256_set1_pd(kB[7]);
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[6]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[5]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[4]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[3]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[2]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[1]));
    den = _mm256_fmadd_pd(den, r, _mm256_set1_pd(kB[0]));
    out.central = _mm256_div_pd(_mm256_mul_pd(out.q, num), den);

    const __m256d absq = _mm256_andnot_pd(sign_mask, out.q);
    out.tails = _mm256_movemask_pd(_mm256_cmp_pd(absq, qmax, _CMP_GT_OQ));
    return out;
}

inline void quantile_fix_tails(double* dst, const QuantileVec& v) {
    _mm256_storeu_pd(dst, v.central);
    if (v.tails != 0) {
        alignas(32) double uu[4];
        alignas(32) double qq[4];
        _mm256_store_pd(uu, v.u);
        _mm256_store_pd(qq, v.q);
        for (int lane = 0; lane < 4; ++lane) {
            if (v.tails & (1 << lane)) dst[lane] = detail::quantile_tail(uu[lane], qq[lane]);
        }
    }
}

}  // namespace

void normal_quantile_avx2(double* values, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const QuantileVec a = quantile_central4(values + i);
        const QuantileVec b = quantile_central4(values + i + 4);
        quantile_fix_tails(values + i, a);
        quantile_fix_tails(values + i + 4, b);
    }
    for (; i + 4 <= n; i += 4) {
        quantile_fix_tails(values + i, quantile_central4(values + i));
    }
    for (; i < n; ++i) values[i] = normal_quantile_one(values[i]);
}

}  // namespace mlpmc::rng::kernels
