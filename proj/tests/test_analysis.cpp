#include <doctest.h>

#include <cmath>

#include "mlpmc/analysis.hpp"

using namespace mlpmc;
using namespace mlpmc::analysis;
using mlpmc::model::make_registry_problem;

TEST_CASE("general error bound closed cases") {
    CHECK(error_bound_general({.M = 1, .N = 0, .K = 1, .kappa = 2.0}) ==
          doctest::Approx(std::exp(0.5) * 2.0).epsilon(1e-14));

    // exp(2 + 1) 3^4 / 4^2
    const double b = error_bound_general(
        {.M = 4, .N = 4, .K = 4, .lipschitz_sum = 1.0, .max_ratio = 1.0, .kappa = 1.0});
    CHECK(b == doctest::Approx(std::exp(3.0) * 81.0 / 16.0).epsilon(1e-13));
    CHECK(b == doctest::Approx(101.68303067).epsilon(1e-9));

    // linear in kappa
    const BoundInputs one{.M = 3, .N = 2, .K = 4, .lipschitz_sum = 0.3, .max_ratio = 0.5,
                          .kappa = 1.0};
    BoundInputs two = one;
    two.kappa = 2.0;
    CHECK(error_bound_general(two) == doctest::Approx(2.0 * error_bound_general(one)));
}

TEST_CASE("exp-euler error bound closed cases") {
    // Lipschitz-free case: exp(M/2) M^{-N/2} kappa.
    CHECK(error_bound_exp_euler(4, 2, 10, 0.0, 1.0, 3.0, 0.0) ==
          doctest::Approx(std::exp(2.0) / 4.0 * 3.0).epsilon(1e-14));

    // M = N = 4, L T = 0.5: e^{2.5} 2^4 / 4^2 = e^{2.5}.
    CHECK(error_bound_exp_euler(4, 4, 10, 0.5, 1.0, 1.0, 0.0) ==
          doctest::Approx(std::exp(2.5)).epsilon(1e-13));
    CHECK(error_bound_exp_euler(4, 4, 10, 0.5, 1.0, 1.0, 0.0) ==
          doctest::Approx(12.182493960703473).epsilon(1e-12));

    // Ratio of consecutive N at fixed M is (1+2LT)/sqrt(M).
    const double r = error_bound_exp_euler(4, 5, 10, 0.25, 1.0, 1.0, 0.1) /
                     error_bound_exp_euler(4, 4, 10, 0.25, 1.0, 1.0, 0.1);
    CHECK(r == doctest::Approx((1.0 + 0.5) / 2.0).epsilon(1e-12));

    // Unweighted scheme swaps LT for KL and T|f(0)| for K|f(0)|.
    const double u = error_bound_exp_euler(3, 2, 5, 0.1, 1.0, 1.0, 0.2,
                                           ExpEulerScheme::unweighted);
    CHECK(u == doctest::Approx(std::exp(0.5 + 3.0 / 2.0) * std::pow(2.0, 2) /
                               3.0 * (1.0 + 5.0 * 0.2))
                   .epsilon(1e-12));
}

TEST_CASE("bound is monotone where the theory says so") {
    // Nonincreasing in N when sqrt(M) > 1 + 2 L T.
    double prev = 1e300;
    for (int N = 0; N <= 8; ++N) {
        const double b = error_bound_exp_euler(9, N, 10, 0.4, 1.0, 1.0, 0.0);
        CHECK(b <= prev);
        prev = b;
    }
    // Nondecreasing in each of L, T, kappa, |f(0)|.
    CHECK(error_bound_exp_euler(4, 3, 10, 0.5, 1.0, 1.0, 0.0) >=
          error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 1.0, 0.0));
    CHECK(error_bound_exp_euler(4, 3, 10, 0.4, 1.5, 1.0, 0.0) >=
          error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 1.0, 0.0));
    CHECK(error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 2.0, 0.0) >=
          error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 1.0, 0.0));
    CHECK(error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 1.0, 0.3) >=
          error_bound_exp_euler(4, 3, 10, 0.4, 1.0, 1.0, 0.0));
}

TEST_CASE("cost bound closed cases") {
    CHECK(cost_bound({.gamma = 1.0, .alpha = 0.0, .p = 1.0, .d = 5, .K = 7, .M = 3, .n = 2}) ==
          doctest::Approx(810.0).epsilon(1e-14));
    CHECK(cost_bound({.gamma = 2.0, .alpha = 1.0, .p = 2.0, .d = 3, .K = 4, .M = 5, .n = 0}) ==
          doctest::Approx(3.5 * 9.0 * 4.0).epsilon(1e-14));
}

TEST_CASE("cost_predict stays below the closed cost bound on the grid") {
    for (const int d : {1, 2, 8}) {
        for (const int K : {4, 16}) {
            for (const int M : {2, 3, 4}) {
                for (int n = 0; n <= 4; ++n) {
                    const auto c = engine::cost_predict(d, K, M, n, d);
                    const double bound =
                        cost_bound({.gamma = 1.0, .alpha = 0.0, .p = 1.0, .d = d, .K = K,
                                    .M = M, .n = n});
                    CHECK(static_cast<double>(c.total()) <= bound);
                }
            }
        }
    }
}

TEST_CASE("select_levels satisfies its certificate minimally") {
    auto cert = [](int n, double c, double kappa) {
        return kappa * std::exp(c) * std::pow(std::sqrt(std::exp(1.0)) * (1.0 + 2.0 * c), n) *
               std::pow(static_cast<double>(n), -0.5 * n);
    };

    CHECK(select_levels(1.0, 0.0, 1.0) == 3);
    CHECK(cert(2, 0.0, 1.0) > 1.0);  // e/2
    CHECK(cert(3, 0.0, 1.0) <= 1.0);

    CHECK(select_levels(0.5, 0.0, 0.0) == 1);

    double prev_eps = 1.0;
    int prev_n = 0;
    for (int halvings = 0; halvings < 12; ++halvings) {
        const int n = select_levels(prev_eps, 0.3, 2.0);
        CHECK(n >= prev_n);
        CHECK(cert(n, 0.3, 2.0) <= prev_eps * (1.0 + 1e-12));
        if (n > 1) CHECK(cert(n - 1, 0.3, 2.0) > prev_eps);
        prev_n = n;
        prev_eps *= 0.5;
    }

    CHECK_THROWS_AS(select_levels(0.0, 0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(select_levels(1.5, 0.0, 1.0), std::domain_error);
}

TEST_CASE("jackknife stderr matches the direct formula") {
    const std::vector<double> sq{1.0, 4.0, 9.0, 16.0, 25.0};
    const double n = 5.0;
    double total = 0.0;
    for (const double s : sq) total += s;
    std::vector<double> loo;
    for (const double s : sq) loo.push_back(std::sqrt((total - s) / (n - 1.0)));
    double mean = 0.0;
    for (const double v : loo) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : loo) ss += (v - mean) * (v - mean);
    const double expect = std::sqrt((n - 1.0) / n * ss);
    CHECK(jackknife_rmse_stderr(sq) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("rmse experiment is exact for the zero-variance problem") {
    const auto problem = make_registry_problem(1, 6, 1.0, {.kind = "zero"},
                                               {.kind = "constant", .value = 2.0});
    oracles::OracleResult ref;
    ref.value = 2.0;
    RmseOptions opt;
    opt.runs = 20;
    opt.seed = 5;
    const auto rows = rmse_experiment(problem, {{2, 1}, {2, 2}, {3, 3}}, ref, opt);
    for (const auto& row : rows) {
        CHECK(row.rmse <= 1e-14);
        CHECK(row.bound >= 0.0);
    }
}

TEST_CASE("rmse experiment on the affine problem sits below the bound") {
    const auto problem = make_registry_problem(1, 10, 1.0, {.kind = "affine", .alpha = 0.5},
                                               {.kind = "constant", .value = 1.0});
    const auto ref = oracles::exact_affine(10, 1.0, 0.5, 0.0, 1.0);
    RmseOptions opt;
    opt.runs = 60;
    opt.seed = 17;
    opt.parallel_width = 2;
    const auto rows = rmse_experiment(problem, {{2, 2}, {4, 4}}, ref, opt);
    for (const auto& row : rows) {
        CHECK(row.rmse <= row.bound);
        CHECK(row.normals_mean > 0.0);
        CHECK(!row.reference_radius_warning);
    }
    CHECK(rows[1].rmse < rows[0].rmse);  // deeper levels do better here
}

TEST_CASE("complexity experiment has the polynomial structure") {
    const auto table = complexity_experiment({1, 10, 100}, {0.5, 0.25, 0.125}, 0.5, 0.1, 1.1,
                                             16, 0.0, 1.0);
    REQUIRE(table.rows.size() == 9);

    // Fixed eps: N is d-free; normals scale exactly linearly in d;
    // normalized cost never increases with d.
    for (std::size_t block = 0; block < 3; ++block) {
        const auto& r1 = table.rows[3 * block + 0];
        const auto& r10 = table.rows[3 * block + 1];
        const auto& r100 = table.rows[3 * block + 2];
        CHECK(r1.N == r10.N);
        CHECK(r10.N == r100.N);
        CHECK(r10.cost_normals == doctest::Approx(10.0 * r1.cost_normals).epsilon(1e-12));
        CHECK(r100.cost_normals == doctest::Approx(100.0 * r1.cost_normals).epsilon(1e-12));
        CHECK(r10.normalized <= r1.normalized * (1.0 + 1e-12));
        CHECK(r100.normalized <= r10.normalized * (1.0 + 1e-12));
    }
    CHECK(table.max_normalized / table.median_normalized < 10.0);
}
