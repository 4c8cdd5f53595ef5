#pragma once

#include <cstdint>
#include <vector>

#include "mlpmc/engine.hpp"
#include "mlpmc/oracles.hpp"
#include "mlpmc/problem.hpp"

namespace mlpmc::analysis {

struct BoundInputs {
    int M = 1;
    int N = 0;
    int K = 1;
    double lipschitz_sum = 0.0;  // sum_l L_l
    double coupling_c = 0.0;     // c with L_l <= c P_k(l)
    double max_ratio = 0.0;      // max_{k>l} L_l / p_{k,l}
    double kappa = 0.0;          // moment bracket
};

// exp(M/2 + sum L_j) M^{-N/2} (1 + 2 max_ratio)^N kappa
double error_bound_general(const BoundInputs& b);

enum class ExpEulerScheme {
    weighted,    // v_k = E[v_{k-1} + (T/K) f(v_{k-1})]; bound in LT
    unweighted,  // v_k = E[f(v_{k-1})]; bound in KL
};

// Weighted: exp(L T + M/2) (1+2LT)^N M^{-N/2} [kappa_v0 + T |f(0)|].
// Unweighted: exp(K L + M/2) (1+2KL)^N M^{-N/2} [kappa_v0 + K |f(0)|].
double error_bound_exp_euler(int M, int N, int K, double lip_f, double T, double kappa_v0,
                             double f_at_zero_abs,
                             ExpEulerScheme scheme = ExpEulerScheme::weighted);

struct ComplexityInputs {
    double gamma = 1.0;
    double alpha = 0.0;
    double p = 1.0;
    int d = 1;
    int K = 1;
    int M = 1;
    int n = 0;
};

// ((1 + 3 gamma)/2) d^p K^alpha (3M)^n
double cost_bound(const ComplexityInputs& ci);

// Smallest N with kappa e^c (sqrt(e)(1+2c))^N N^{-N/2} <= eps; this is the
// certificate the complexity proof pins at M = N. Terminates for every
// eps in (0,1] because N^{-N/2} beats any geometric factor.
int select_levels(double eps, double c, double kappa);

struct RmseRow {
    int M = 0;
    int N = 0;
    int runs = 0;
    double mean = 0.0;
    double rmse = 0.0;
    double stderr_jackknife = 0.0;
    double bound = 0.0;
    double normals_mean = 0.0;
    double reference = 0.0;
    bool reference_radius_warning = false;
};

struct RmseOptions {
    int runs = 200;
    std::uint64_t seed = 0;
    int parallel_width = 1;
    std::uint64_t max_total_samples = std::uint64_t{1} << 40;
};

// Empirical RMSE of mlp_exp_euler against a frozen reference, one row per
// (M, N) cell. Replica r uses seed+1+r; all cells share the same replica
// seeds, which pairs the comparison across cells.
std::vector<RmseRow> rmse_experiment(const model::ExpEulerProblem& problem,
                                     const std::vector<std::pair<int, int>>& mn_grid,
                                     const oracles::OracleResult& reference,
                                     const RmseOptions& options);

struct ComplexityRow {
    int d = 0;
    double eps = 0.0;
    int N = 0;
    double cost_normals = 0.0;
    double cost_uniforms = 0.0;
    double cost_total = 0.0;
    double bound = 0.0;        // ((1+3)/2) d (3M)^n at gamma=1, alpha=0, p=1
    double normalized = 0.0;   // cost_total eps^{2+delta} / (d^p K^alpha)
};

struct ComplexityTable {
    std::vector<ComplexityRow> rows;
    double max_normalized = 0.0;
    double median_normalized = 0.0;
};

// Analytic cost table over (d, eps): N = select_levels(eps, c, kappa),
// cost = cost_predict(d, K, N, N). No sampling happens here.
ComplexityTable complexity_experiment(const std::vector<int>& dims,
                                      const std::vector<double>& eps_list, double delta,
                                      double coupling_c, double kappa, int K, double cost_alpha,
                                      double cost_p);

// Jackknife standard error of the RMSE estimate from per-run squared errors.
double jackknife_rmse_stderr(const std::vector<double>& squared_errors);

}  // namespace mlpmc::analysis
