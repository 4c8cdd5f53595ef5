#pragma once

#include <cmath>
#include <cstdint>

// Shared between the scalar and AVX2 translation units. The AS241 central
// branch is written as one fixed fma chain so both variants execute the
// exact same IEEE operations per element.

namespace mlpmc::rng::kernels::detail {

inline constexpr double kCentralQ = 0.425;
inline constexpr double kCentralR = 0.180625;  // kCentralQ^2

inline constexpr double kA[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
    1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
    3.3430575583588128105e4,  2.5090809287301226727e3,
};
inline constexpr double kB[8] = {
    1.0,
    4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
    2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
    5.2264952788528545610e3,
};
inline constexpr double kC[8] = {
    1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
    3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4,
};
inline constexpr double kD[8] = {
    1.0,
    2.05319162663775882187e0,  1.67638483018380384940e0, 6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9,
};
inline constexpr double kE[8] = {
    6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7,
};
inline constexpr double kF[8] = {
    1.0,
    5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15,
};

// Central branch, |u - 0.5| <= 0.425. Exactly mirrored by the AVX2 lane code.
inline double quantile_central(double q) {
    const double r = std::fma(-q, q, kCentralR);
    double num = kA[7];
    num = std::fma(num, r, kA[6]);
    num = std::fma(num, r, kA[5]);
    num = std::fma(num, r, kA[4]);
    num = std::fma(num, r, kA[3]);
    num = std::fma(num, r, kA[2]);
    num = std::fma(num, r, kA[1]);
    num = std::fma(num, r, kA[0]);
    double den = kB[7];
    den = std::fma(den, r, kB[6]);
    den = std::fma(den, r, kB[5]);
    den = std::fma(den, r, kB[4]);
    den = std::fma(den, r, kB[3]);
    den = std::fma(den, r, kB[2]);
    den = std::fma(den, r, kB[1]);
    den = std::fma(den, r, kB[0]);
    return (q * num) / den;
}

// Tail branch; shared verbatim by both variants (no SIMD counterpart).
double quantile_tail(double u, double q);

}  // namespace mlpmc::rng::kernels::detail
