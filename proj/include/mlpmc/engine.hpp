#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlpmc/cost_ledger.hpp"
#include "mlpmc/errors.hpp"
#include "mlpmc/index_distribution.hpp"
#include "mlpmc/multi_index.hpp"
#include "mlpmc/problem.hpp"

namespace mlpmc::engine {

struct MlpParams {
    int branching = 2;  // M
    int levels = 1;     // n
    std::uint64_t seed = 0;
    std::uint64_t max_total_samples = std::uint64_t{1} << 40;  // cap on scalar draws
    int parallel_width = 1;
};

struct ParamsEcho {
    int d = 0;
    int K = 0;
    int M = 0;
    int n = 0;
    int k = 0;
    std::uint64_t seed = 0;
};

struct Estimate {
    double value = 0.0;
    CostLedger ledger;
    ParamsEcho params;
};

struct PredictedCost {
    std::uint64_t normals = 0;
    std::uint64_t uniforms = 0;
    bool overflow = false;  // exact counters overflowed; *_approx still valid
    double normals_approx = 0.0;
    double uniforms_approx = 0.0;

    [[nodiscard]] double total_approx() const { return normals_approx + uniforms_approx; }
    [[nodiscard]] std::uint64_t total() const { return normals + uniforms; }
};

// Closed evaluation of the fast-path cost recursion
//   C(n) = s M^n + sum_{j=1}^{n-1} M^{n-j} (s + 1 + C(j) + C(j-1)),
// s = per_step_normals, split into its normal and uniform components. The
// "+1" is the level-index uniform. K takes no part; it is kept so call sites
// read like the cost tables they feed.
PredictedCost cost_predict(int d, int K, int M, int n, int per_step_normals);

// Budget bound for the general path at top index k: one base sample runs two
// k-step paths, one correction sample runs at most a k-step path plus one
// uniform before recursing.
PredictedCost cost_bound_general_path(int step_normals, int k, int M, int n);

// X^{theta,k,x}_l: iterates the backward one-step dynamics from index k down
// to l. Step s draws its noise at slot s*step_normals of the (seed, theta,
// brownian) stream, so the draw positions are a pure function of the key.
// Consumes exactly (k-l)*step_normals normals into `ledger`.
std::vector<double> simulate_x(const model::ProblemSpec& spec, const rng::MultiIndex& theta,
                               std::uint64_t seed, int k, int l, std::span<const double> x,
                               CostLedger& ledger);

// As simulate_x but returns all intermediate states; entry s-l is X_s,
// s = l..k.
std::vector<std::vector<double>> simulate_x_path(const model::ProblemSpec& spec,
                                                 const rng::MultiIndex& theta,
                                                 std::uint64_t seed, int k, int l,
                                                 std::span<const double> x, CostLedger& ledger);

// Full-history recursive estimator in the general one-step form. Follows the
// level structure literally: the base level averages g plus the f(.,0) sums
// over M^n samples on fresh indices (theta,0,-m)/(theta,0,m); level j
// averages M^{n-j} importance-weighted corrections that recurse at depths j
// and j-1 on (theta,j,m)/(theta,j,-m) with a shared X argument. n = 0 is the
// zero estimator with an empty ledger.
Estimate mlp_general(const model::ProblemSpec& spec, const model::IndexDistribution& dist,
                     const rng::MultiIndex& theta, int k, const MlpParams& params,
                     std::span<const double> x = {});

// Fast path for the exponential-Euler family: one d-dimensional Gaussian
// increment per sample (variance t_k - t_l), one uniform per correction
// sample, bracket weighted by t_k. Identical in law to mlp_general on the
// wrapped problem; its measured ledger matches cost_predict exactly.
Estimate mlp_exp_euler(const model::ExpEulerProblem& problem, const rng::MultiIndex& theta,
                       int k, const MlpParams& params, std::span<const double> x = {});

}  // namespace mlpmc::engine
