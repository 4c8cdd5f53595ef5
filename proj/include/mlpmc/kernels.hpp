#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "mlpmc/philox.hpp"

namespace mlpmc::rng::kernels {

// Hot inner loops: bulk counter-based uniform generation and the uniform ->
// standard-normal quantile transform. Each has a scalar reference and an
// AVX2 variant selected once at runtime. The two variants are bit-identical
// by construction (same fma/div sequence per element), which the test suite
// asserts, so replay determinism does not depend on the host CPU.

// Fills out[0..n) with doubles in (0,1). Slot s is a pure function of
// (state, s): block s/2 of the Philox stream, half s%2.
void fill_u01(const StreamState& state, std::uint64_t first_slot, double* out, std::size_t n);

// In-place inverse standard-normal CDF (Wichura AS241, |z| accurate to
// full double precision).
void normal_quantile(double* values, std::size_t n);

// Scalar reference implementations (always available; used directly by the
// equivalence tests).
void fill_u01_scalar(const StreamState& state, std::uint64_t first_slot, double* out,
                     std::size_t n);
void normal_quantile_scalar(double* values, std::size_t n);

double normal_quantile_one(double u);

// Runtime dispatch control. Honors the MLPMC_KERNEL environment variable
// ("scalar", "avx2", "auto") on first use.
std::string_view active_kernel();
bool force_kernel(std::string_view name);

}  // namespace mlpmc::rng::kernels
