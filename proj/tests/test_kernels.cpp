#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "mlpmc/kernels.hpp"
#include "mlpmc/philox.hpp"

using namespace mlpmc::rng;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<double> probe_uniforms() {
    std::vector<double> us;
    // Dense central coverage plus deep tails on both sides.
    for (int i = 1; i < 400; ++i) us.push_back(i / 400.0);
    for (double u = 1e-290; u < 0.4; u *= 19.0) {
        us.push_back(u);
        if (1.0 - u < 1.0) us.push_back(1.0 - u);
    }
    us.push_back(0.5);
    us.push_back(0.075);  // near the central/tail split
    us.push_back(0.925);
    us.push_back(0.5 - 0.425);
    us.push_back(0.5 + 0.425);
    return us;
}

}  // namespace

TEST_CASE("normal quantile inverts the normal cdf") {
    for (const double u : probe_uniforms()) {
        const double z = kernels::normal_quantile_one(u);
        // Invert through the smaller tail so erfc stays accurate; the CDF
        // magnifies quantile error by a factor ~z^2 at depth z.
        const double small = std::min(u, 1.0 - u);
        const double back = u <= 0.5 ? normal_cdf(z) : normal_cdf(-z);
        if (small > 1e-290) {
            const double err = std::fabs(back - small) / small;
            CHECK(err < 1e-13 * (1.0 + z * z));
        }
    }
    CHECK(kernels::normal_quantile_one(0.5) == 0.0);
    CHECK(kernels::normal_quantile_one(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
}

TEST_CASE("normal quantile is monotone") {
    double prev = -1e308;
    for (int i = 1; i < 20000; ++i) {
        const double z = kernels::normal_quantile_one(i / 20000.0);
        CHECK(z >= prev);
        prev = z;
    }
}

TEST_CASE("scalar and dispatched kernels are bit-identical") {
    if (!kernels::force_kernel("avx2")) {
        MESSAGE("avx2 unavailable; dispatch equivalence trivially scalar");
        return;
    }

    StreamState state{0x1234u, 0x9999u, 0xabcdefu, 0x77u};
    for (const std::uint64_t first_slot : {0ull, 1ull, 7ull, 1000000ull}) {
        for (const std::size_t n : {0ull, 1ull, 2ull, 3ull, 15ull, 16ull, 17ull, 4097ull}) {
            std::vector<double> a(n), b(n);
            kernels::fill_u01_scalar(state, first_slot, a.data(), n);
            kernels::fill_u01(state, first_slot, b.data(), n);
            CHECK(std::memcmp(a.data(), b.data(), n * sizeof(double)) == 0);

            std::vector<double> qa = a;
            std::vector<double> qb = a;
            kernels::normal_quantile_scalar(qa.data(), n);
            kernels::normal_quantile(qb.data(), n);
            CHECK(std::memcmp(qa.data(), qb.data(), n * sizeof(double)) == 0);
        }
    }

    // Tail-heavy batch exercises the lane fix-up path.
    std::vector<double> tails = probe_uniforms();
    std::vector<double> ta = tails;
    std::vector<double> tb = tails;
    kernels::normal_quantile_scalar(ta.data(), ta.size());
    kernels::normal_quantile(tb.data(), tb.size());
    CHECK(std::memcmp(ta.data(), tb.data(), ta.size() * sizeof(double)) == 0);

    kernels::force_kernel("auto");
}

TEST_CASE("uniform fill stays strictly inside (0,1) and replays") {
    StreamState state{1u, 2u, 3u, 4u};
    std::vector<double> a(5000);
    kernels::fill_u01_scalar(state, 11, a.data(), a.size());
    for (const double u : a) {
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    std::vector<double> b(5000);
    kernels::fill_u01_scalar(state, 11, b.data(), b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);

    // Slot addressing: filling [11, 5011) equals filling [0, 5011) tail.
    std::vector<double> c(5011);
    kernels::fill_u01_scalar(state, 0, c.data(), c.size());
    CHECK(std::memcmp(a.data(), c.data() + 11, a.size() * sizeof(double)) == 0);
}

TEST_CASE("philox block function matches itself across offset splits") {
    StreamState s{0xdeadbeefu, 0xfeedfaceu, 0x1111u, 0x2222u};
    const PhiloxBlock b1 = s.block(42);
    const PhiloxBlock b2 = s.block(42);
    CHECK(b1.w == b2.w);
    CHECK(s.block(42).w != s.block(43).w);
}
