#include <doctest.h>

#include <cmath>
#include <vector>

#include "mlpmc/engine.hpp"
#include "mlpmc/rng_stream.hpp"

using namespace mlpmc;
using namespace mlpmc::engine;
using mlpmc::model::make_exp_euler_problem;
using mlpmc::model::make_grid_index_distribution;
using mlpmc::model::make_registry_problem;
using mlpmc::rng::MultiIndex;

namespace {

// Straight-line re-evaluation of the fast-path cost recursion, kept separate
// from the production overflow-checked code.
void cost_recursion_ref(int d, int M, int n, double* normals, double* uniforms) {
    std::vector<double> nr(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> un(static_cast<std::size_t>(n) + 1, 0.0);
    for (int lvl = 1; lvl <= n; ++lvl) {
        double nrm = d * std::pow(M, lvl);
        double uni = 0.0;
        for (int j = 1; j <= lvl - 1; ++j) {
            const double m_nj = std::pow(M, lvl - j);
            nrm += m_nj * (d + nr[j] + nr[j - 1]);
            uni += m_nj * (1.0 + un[j] + un[j - 1]);
        }
        nr[lvl] = nrm;
        un[lvl] = uni;
    }
    *normals = nr[n];
    *uniforms = un[n];
}

MlpParams params_for(int M, int n, std::uint64_t seed, int width = 1) {
    MlpParams p;
    p.branching = M;
    p.levels = n;
    p.seed = seed;
    p.parallel_width = width;
    return p;
}

}  // namespace

TEST_CASE("cost_predict closed cases") {
    CHECK(cost_predict(3, 8, 4, 0, 3).total() == 0);
    CHECK(cost_predict(3, 8, 4, 1, 3).normals == 12);  // d M
    CHECK(cost_predict(3, 8, 4, 1, 3).uniforms == 0);

    const auto c = cost_predict(2, 8, 3, 2, 2);
    CHECK(c.normals == 42);
    CHECK(c.uniforms == 3);
    CHECK(c.total() == 45);  // 2*9 + 3*(2+1+6+0)
}

TEST_CASE("cost_predict agrees with the reference recursion on the grid") {
    for (const int d : {1, 2, 8}) {
        for (const int M : {2, 3, 4}) {
            for (int n = 0; n <= 4; ++n) {
                double nr = 0.0, un = 0.0;
                cost_recursion_ref(d, M, n, &nr, &un);
                const auto c = cost_predict(d, 16, M, n, d);
                CHECK(static_cast<double>(c.normals) == nr);
                CHECK(static_cast<double>(c.uniforms) == un);
                CHECK(c.normals_approx == doctest::Approx(nr).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("cost_predict flags overflow but keeps the magnitude") {
    const auto c = cost_predict(1, 4, 10, 30, 1);
    CHECK(c.overflow);
    CHECK(c.total_approx() > 1e30);
}

TEST_CASE("measured exp-euler ledger equals cost_predict exactly") {
    for (const int d : {1, 3}) {
        const auto problem = make_registry_problem(d, 4, 1.0, {.kind = "affine", .alpha = 0.5},
                                                   {.kind = "gaussian_bump"});
        for (const int M : {2, 3}) {
            for (int n = 0; n <= 3; ++n) {
                const auto est =
                    mlp_exp_euler(problem, MultiIndex{0}, 4, params_for(M, n, 7));
                const auto pred = cost_predict(d, 4, M, n, d);
                CHECK(est.ledger.normals == pred.normals);
                CHECK(est.ledger.uniforms == pred.uniforms);
            }
        }
    }
}

TEST_CASE("budget refusal happens before sampling") {
    const auto problem = make_registry_problem(1, 4, 1.0, {.kind = "affine", .alpha = 0.5},
                                               {.kind = "constant", .value = 1.0});
    auto params = params_for(4, 4, 7);
    params.max_total_samples = 10;
    CHECK_THROWS_AS(mlp_exp_euler(problem, MultiIndex{0}, 4, params), BudgetError);

    auto huge = params_for(10, 30, 7);
    CHECK_THROWS_AS(mlp_exp_euler(problem, MultiIndex{0}, 4, huge), BudgetError);
}

TEST_CASE("n = 0 returns the zero estimate with an empty ledger") {
    const auto problem = make_registry_problem(2, 4, 1.0, {.kind = "sin", .scale = 0.3},
                                               {.kind = "gaussian_bump"});
    const auto est = mlp_exp_euler(problem, MultiIndex{0}, 4, params_for(3, 0, 13));
    CHECK(est.value == 0.0);
    CHECK(est.ledger.normals == 0);
    CHECK(est.ledger.uniforms == 0);

    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);
    const auto gen = mlp_general(spec, dist, MultiIndex{0}, 4, params_for(3, 0, 13));
    CHECK(gen.value == 0.0);
    CHECK(gen.ledger.total_draws() == 0);
}

TEST_CASE("k = 0 returns the terminal with zero variance across seeds") {
    const auto problem = make_registry_problem(2, 4, 1.0, {.kind = "sin", .scale = 0.3},
                                               {.kind = "gaussian_bump"});
    const std::vector<double> x{0.25, -0.5};
    const double gx = problem.terminal(x);

    // Zero variance: every seed yields the identical bits. The value agrees
    // with g(x) up to the rounding of averaging M^n equal terms.
    const double first =
        mlp_exp_euler(problem, MultiIndex{0}, 0, params_for(3, 2, 1), x).value;
    CHECK(first == doctest::Approx(gx).epsilon(1e-14));
    for (std::uint64_t seed = 2; seed <= 20; ++seed) {
        const auto est = mlp_exp_euler(problem, MultiIndex{0}, 0, params_for(3, 2, seed), x);
        CHECK(est.value == first);
    }
    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);
    const double gfirst =
        mlp_general(spec, dist, MultiIndex{0}, 0, params_for(3, 2, 1), x).value;
    CHECK(gfirst == doctest::Approx(gx).epsilon(1e-14));
    for (std::uint64_t seed = 2; seed <= 20; ++seed) {
        const auto est = mlp_general(spec, dist, MultiIndex{0}, 0, params_for(3, 2, seed), x);
        CHECK(est.value == gfirst);
    }
}

TEST_CASE("constant nonlinearity keeps every correction level exactly zero") {
    // f(a) - a constant in a: the two bracket halves cancel exactly, so the
    // estimate equals the base level regardless of depth.
    const auto problem = make_registry_problem(1, 4, 1.0, {.kind = "constant", .beta = 0.7},
                                               {.kind = "constant", .value = 2.5});
    const auto est = mlp_exp_euler(problem, MultiIndex{0}, 4, params_for(3, 3, 21));
    CHECK(est.value == 2.5 + 1.0 * 0.7);  // c0 + t_K f(0), exact

    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);
    const auto gen = mlp_general(spec, dist, MultiIndex{0}, 4, params_for(3, 3, 21));
    CHECK(gen.value == 2.5 + 1.0 * 0.7);
}

TEST_CASE("simulate_x base case and unrolled sum") {
    const auto problem = make_registry_problem(2, 5, 1.0, {.kind = "zero"},
                                               {.kind = "constant", .value = 1.0});
    const auto spec = make_exp_euler_problem(problem);
    const std::vector<double> x{1.0, -2.0};

    CostLedger ledger;
    const auto same = simulate_x(spec, MultiIndex{3}, 11, 3, 3, x, ledger);
    CHECK(same == x);
    CHECK(ledger.total_draws() == 0);

    // phi(x, w) = x + w: the endpoint is x plus the step noises, which we
    // re-derive from the same stream slots.
    const auto end = simulate_x(spec, MultiIndex{3}, 11, 3, 1, x, ledger);
    CHECK(ledger.normals == 4);  // 2 steps, 2 normals each
    rng::RandomStream stream(rng::StreamKey{11, MultiIndex{3}, rng::Channel::brownian});
    std::vector<double> z2(2), z1(2);
    stream.normals_at(2 * 2, z2, 1.0);
    stream.normals_at(1 * 2, z1, 1.0);
    const double h = spec.grid.spacing(0);
    for (int i = 0; i < 2; ++i) {
        CHECK(end[static_cast<std::size_t>(i)] ==
              doctest::Approx(x[static_cast<std::size_t>(i)] +
                              std::sqrt(h) * (z2[static_cast<std::size_t>(i)] +
                                              z1[static_cast<std::size_t>(i)]))
                  .epsilon(1e-15));
    }

    CHECK_THROWS_AS(simulate_x(spec, MultiIndex{3}, 11, 2, 3, x, ledger), std::domain_error);
}

TEST_CASE("simulate_x endpoint is Gaussian with variance t_k") {
    // K steps down to 0 aggregate to N(x, T I_d); check the sample moments.
    const auto problem = make_registry_problem(2, 3, 0.9, {.kind = "zero"},
                                               {.kind = "constant", .value = 1.0});
    const auto spec = make_exp_euler_problem(problem);
    const std::vector<double> x{0.0, 0.0};
    const int runs = 100000;
    double sum[2] = {0, 0}, sumsq[2] = {0, 0}, cross = 0.0;
    CostLedger ledger;
    for (int r = 0; r < runs; ++r) {
        const auto end = simulate_x(spec, MultiIndex{static_cast<std::int64_t>(r)}, 5, 3, 0, x,
                                    ledger);
        for (int i = 0; i < 2; ++i) {
            sum[i] += end[static_cast<std::size_t>(i)];
            sumsq[i] += end[static_cast<std::size_t>(i)] * end[static_cast<std::size_t>(i)];
        }
        cross += end[0] * end[1];
    }
    CHECK(ledger.normals == static_cast<std::uint64_t>(runs) * 3 * 2);
    const double T = 0.9;
    for (int i = 0; i < 2; ++i) {
        const double mean = sum[i] / runs;
        const double var = sumsq[i] / runs - mean * mean;
        // 4 sigma: sd of the variance estimate is about T sqrt(2/runs)
        CHECK(std::fabs(mean) <= 4.0 * std::sqrt(T / runs));
        CHECK(std::fabs(var - T) <= 4.0 * T * std::sqrt(2.0 / runs));
    }
    CHECK(std::fabs(cross / runs) <= 4.0 * T / std::sqrt(static_cast<double>(runs)));
}

TEST_CASE("estimates are bit-identical across parallel widths and reruns") {
    const auto problem = make_registry_problem(2, 6, 1.5, {.kind = "sin", .scale = 0.4},
                                               {.kind = "gaussian_bump"});
    const auto base = mlp_exp_euler(problem, MultiIndex{0}, 6, params_for(3, 3, 99, 1));
    for (const int width : {1, 2, 4, 8}) {
        const auto est = mlp_exp_euler(problem, MultiIndex{0}, 6, params_for(3, 3, 99, width));
        CHECK(est.value == base.value);
        CHECK(est.ledger.normals == base.ledger.normals);
        CHECK(est.ledger.uniforms == base.ledger.uniforms);
    }

    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);
    const auto gbase = mlp_general(spec, dist, MultiIndex{0}, 6, params_for(3, 3, 99, 1));
    for (const int width : {2, 8}) {
        const auto est = mlp_general(spec, dist, MultiIndex{0}, 6, params_for(3, 3, 99, width));
        CHECK(est.value == gbase.value);
        CHECK(est.ledger.normals == gbase.ledger.normals);
    }
}

TEST_CASE("general path ledger satisfies the cost recursion bound") {
    const auto problem = make_registry_problem(2, 5, 1.0, {.kind = "sin", .scale = 0.3},
                                               {.kind = "gaussian_bump"});
    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);
    for (int n = 1; n <= 3; ++n) {
        const auto est = mlp_general(spec, dist, MultiIndex{0}, 5, params_for(3, n, 31));
        const auto bound = cost_bound_general_path(spec.step_normals, 5, 3, n);
        CHECK(est.ledger.total_draws() <= bound.total());
    }
}

TEST_CASE("affine estimator mean follows the Picard chain") {
    // For f(a) = alpha a + beta and constant v0 = c0, the estimator mean at
    // depth n is the Picard iterate m_{k,n} = c0 + k h beta + alpha h
    // sum_{l<k} m_{l,n-1}; this is an independent oracle for the bias.
    const double alpha = 0.5, c0 = 1.0, T = 1.0;
    const int K = 4, M = 3, N = 3;
    const double h = T / K;
    std::vector<std::vector<double>> m(static_cast<std::size_t>(N) + 1,
                                       std::vector<double>(static_cast<std::size_t>(K) + 1, 0.0));
    for (int n = 1; n <= N; ++n) {
        for (int k = 0; k <= K; ++k) {
            double acc = 0.0;
            for (int l = 0; l < k; ++l) acc += m[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(l)];
            m[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] =
                c0 + alpha * h * acc;  // beta = 0
        }
    }
    const double picard_mean = m[static_cast<std::size_t>(N)][static_cast<std::size_t>(K)];

    const auto problem = make_registry_problem(1, K, T, {.kind = "affine", .alpha = alpha},
                                               {.kind = "constant", .value = c0});
    const int runs = 400;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto est = mlp_exp_euler(problem, MultiIndex{0}, K,
                                       params_for(M, N, 1000 + static_cast<std::uint64_t>(r)));
        sum += est.value;
        sumsq += est.value * est.value;
    }
    const double mean = sum / runs;
    const double sd = std::sqrt(std::max(0.0, sumsq / runs - mean * mean));
    CHECK(std::fabs(mean - picard_mean) <= 4.0 * sd / std::sqrt(static_cast<double>(runs)));
}

TEST_CASE("non-uniform grids: estimator mean hits the exact affine recursion") {
    // v_k = v_{k-1} + h_{k-1} (alpha v_{k-1} + beta) step by step is an
    // exact oracle for any grid; with N >= K+1 the Picard chain has
    // converged, so the estimator mean matches it without bias.
    const double alpha = 0.5, beta = 0.2;
    model::ExpEulerProblem p;
    p.d = 1;
    p.grid = model::TimeGrid({0.0, 0.1, 0.5, 1.0});
    p.f = [=](double a) { return alpha * a + beta; };
    p.lip_f = alpha;
    p.f_zero = beta;
    p.terminal = [](std::span<const double>) { return 1.0; };
    p.eval_point = {0.0};
    p.kappa_v0 = 1.0;

    double exact = 1.0;
    for (int s = 0; s < 3; ++s) {
        exact += p.grid.spacing(s) * (alpha * exact + beta);
    }

    const int runs = 200;
    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto est = mlp_exp_euler(p, MultiIndex{0}, 3,
                                       params_for(4, 4, 7000 + static_cast<std::uint64_t>(r)));
        sum += est.value;
        sumsq += est.value * est.value;
    }
    const double mean = sum / runs;
    const double sd = std::sqrt(std::max(0.0, sumsq / runs - mean * mean));
    CHECK(std::fabs(mean - exact) <= 4.0 * sd / std::sqrt(static_cast<double>(runs)));

    // The general path agrees in law on the same grid (shared increments
    // law, spacing-ratio index weights).
    const auto spec = make_exp_euler_problem(p);
    const auto dist = make_grid_index_distribution(spec.grid);
    double gsum = 0.0, gsumsq = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto est = mlp_general(spec, dist, MultiIndex{0}, 3,
                                     params_for(4, 4, 9000 + static_cast<std::uint64_t>(r)));
        gsum += est.value;
        gsumsq += est.value * est.value;
    }
    const double gmean = gsum / runs;
    const double gsd = std::sqrt(std::max(0.0, gsumsq / runs - gmean * gmean));
    const double combined = std::sqrt((sd * sd + gsd * gsd) / runs);
    CHECK(std::fabs(mean - gmean) <= 4.0 * combined);
}

TEST_CASE("forced kernel variants give bit-identical estimates") {
    const auto problem = make_registry_problem(2, 5, 1.0, {.kind = "sin", .scale = 0.3},
                                               {.kind = "gaussian_bump"});
    if (!rng::kernels::force_kernel("avx2")) {
        MESSAGE("avx2 unavailable; nothing to cross-check");
        return;
    }
    const auto avx2 = mlp_exp_euler(problem, MultiIndex{0}, 5, params_for(3, 3, 77));
    REQUIRE(rng::kernels::force_kernel("scalar"));
    const auto scalar = mlp_exp_euler(problem, MultiIndex{0}, 5, params_for(3, 3, 77));
    REQUIRE(rng::kernels::force_kernel("auto"));
    CHECK(avx2.value == scalar.value);
    CHECK(avx2.ledger.normals == scalar.ledger.normals);
}

TEST_CASE("general and fast paths agree in law on the wrapped problem") {
    const int K = 4, M = 3, N = 3;
    const auto problem = make_registry_problem(1, K, 1.0, {.kind = "affine", .alpha = 0.5},
                                               {.kind = "constant", .value = 1.0});
    const auto spec = make_exp_euler_problem(problem);
    const auto dist = make_grid_index_distribution(spec.grid);

    const int runs = 200;
    double sf = 0.0, sf2 = 0.0, sg = 0.0, sg2 = 0.0;
    for (int r = 0; r < runs; ++r) {
        const auto seed = 5000 + static_cast<std::uint64_t>(r);
        const double f = mlp_exp_euler(problem, MultiIndex{0}, K, params_for(M, N, seed)).value;
        const double g =
            mlp_general(spec, dist, MultiIndex{0}, K, params_for(M, N, seed + 100000)).value;
        sf += f;
        sf2 += f * f;
        sg += g;
        sg2 += g * g;
    }
    const double mf = sf / runs, mg = sg / runs;
    const double vf = sf2 / runs - mf * mf, vg = sg2 / runs - mg * mg;
    const double combined = std::sqrt((vf + vg) / runs);
    CHECK(std::fabs(mf - mg) <= 4.0 * combined);
}
