#include "mlpmc/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "mlpmc/parallel.hpp"
#include "mlpmc/rng_stream.hpp"

namespace mlpmc::engine {

namespace {

// Fixed block sizes for the deterministic reductions. Single-threaded runs
// use the same block structure, so the summation order never depends on the
// worker count.
constexpr std::size_t kBaseBlock = 64;
constexpr std::size_t kCorrBlock = 8;

struct PartialSum {
    double sum = 0.0;
    CostLedger ledger;
};

bool mul_overflows(std::uint64_t a, std::uint64_t b) {
    return b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b;
}

bool add_overflows(std::uint64_t a, std::uint64_t b) {
    return a > std::numeric_limits<std::uint64_t>::max() - b;
}

std::uint64_t ipow_u64(std::uint64_t base, int exp, bool* overflow) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (mul_overflows(r, base)) {
            *overflow = true;
            return std::numeric_limits<std::uint64_t>::max();
        }
        r *= base;
    }
    return r;
}

// Shared evaluator for both cost recursions: per-sample fixed draw counts
// (base_normals per base sample, corr_normals + one uniform per correction
// sample) plus the recursive sub-calls at levels j and j-1. Exact counters
// carry an overflow flag; double magnitudes stay valid far beyond 2^64 so a
// refusal can still state the would-be cost.
PredictedCost eval_cost_recursion(std::uint64_t base_normals, std::uint64_t corr_normals, int M,
                                  int n) {
    const auto size = static_cast<std::size_t>(n) + 1;
    std::vector<std::uint64_t> nrm(size, 0);
    std::vector<std::uint64_t> uni(size, 0);
    std::vector<double> nrm_a(size, 0.0);
    std::vector<double> uni_a(size, 0.0);

    bool overflow = false;
    auto mul = [&overflow](std::uint64_t a, std::uint64_t b) -> std::uint64_t {
        if (mul_overflows(a, b)) {
            overflow = true;
            return 0;
        }
        return a * b;
    };
    auto add = [&overflow](std::uint64_t a, std::uint64_t b) -> std::uint64_t {
        if (add_overflows(a, b)) {
            overflow = true;
            return 0;
        }
        return a + b;
    };

    const auto m_d = static_cast<double>(M);
    for (int level = 1; level <= n; ++level) {
        const auto li = static_cast<std::size_t>(level);
        bool pow_of = false;
        std::uint64_t normals = mul(base_normals,
                                    ipow_u64(static_cast<std::uint64_t>(M), level, &pow_of));
        std::uint64_t uniforms = 0;
        double normals_a = static_cast<double>(base_normals) * std::pow(m_d, level);
        double uniforms_a = 0.0;
        overflow = overflow || pow_of;

        for (int j = 1; j <= level - 1; ++j) {
            const auto ji = static_cast<std::size_t>(j);
            bool of = false;
            const std::uint64_t m_nj = ipow_u64(static_cast<std::uint64_t>(M), level - j, &of);
            overflow = overflow || of;
            const double m_nj_a = std::pow(m_d, level - j);

            normals = add(normals,
                          mul(m_nj, add(corr_normals, add(nrm[ji], nrm[ji - 1]))));
            uniforms = add(uniforms, mul(m_nj, add(1, add(uni[ji], uni[ji - 1]))));
            normals_a += m_nj_a * (static_cast<double>(corr_normals) + nrm_a[ji] +
                                   nrm_a[ji - 1]);
            uniforms_a += m_nj_a * (1.0 + uni_a[ji] + uni_a[ji - 1]);
        }
        nrm[li] = normals;
        uni[li] = uniforms;
        nrm_a[li] = normals_a;
        uni_a[li] = uniforms_a;
    }

    PredictedCost out;
    out.overflow = overflow;
    out.normals = overflow ? 0 : nrm[static_cast<std::size_t>(n)];
    out.uniforms = overflow ? 0 : uni[static_cast<std::size_t>(n)];
    out.normals_approx = nrm_a[static_cast<std::size_t>(n)];
    out.uniforms_approx = uni_a[static_cast<std::size_t>(n)];
    return out;
}

void authorize(const PredictedCost& cost, std::uint64_t cap) {
    if (cost.overflow || cost.total() > cap) {
        throw BudgetError(cost.total_approx(), cap);
    }
}

}  // namespace

PredictedCost cost_predict(int d, int K, int M, int n, int per_step_normals) {
    (void)d;
    (void)K;
    if (M < 1) throw std::domain_error("cost_predict: M must be >= 1");
    if (n < 0) throw std::domain_error("cost_predict: n must be >= 0");
    const auto s = static_cast<std::uint64_t>(per_step_normals);
    return eval_cost_recursion(s, s, M, n);
}

PredictedCost cost_bound_general_path(int step_normals, int k, int M, int n) {
    const auto path = static_cast<std::uint64_t>(step_normals) * static_cast<std::uint64_t>(k);
    return eval_cost_recursion(2 * path, path, M, n);
}

std::vector<double> simulate_x(const model::ProblemSpec& spec, const rng::MultiIndex& theta,
                               std::uint64_t seed, int k, int l, std::span<const double> x,
                               CostLedger& ledger) {
    auto path = simulate_x_path(spec, theta, seed, k, l, x, ledger);
    return std::move(path.front());
}

std::vector<std::vector<double>> simulate_x_path(const model::ProblemSpec& spec,
                                                 const rng::MultiIndex& theta,
                                                 std::uint64_t seed, int k, int l,
                                                 std::span<const double> x, CostLedger& ledger) {
    if (l > k || l < 0) throw std::domain_error("simulate_x: need 0 <= l <= k");
    if (x.size() != static_cast<std::size_t>(spec.d)) {
        throw std::invalid_argument("simulate_x: state has wrong dimension");
    }
    std::vector<std::vector<double>> states(static_cast<std::size_t>(k - l) + 1);
    states[static_cast<std::size_t>(k - l)] = std::vector<double>(x.begin(), x.end());

    rng::RandomStream stream(rng::StreamKey{seed, theta, rng::Channel::brownian});
    const auto sn = static_cast<std::uint64_t>(spec.step_normals);
    std::vector<double> z(static_cast<std::size_t>(spec.step_normals));
    for (int s = k - 1; s >= l; --s) {
        stream.normals_at(static_cast<std::uint64_t>(s) * sn, z, 1.0);
        auto& next = states[static_cast<std::size_t>(s - l)];
        next.resize(static_cast<std::size_t>(spec.d));
        spec.dynamics(s, states[static_cast<std::size_t>(s - l + 1)], z, next);
    }
    ledger.merge(stream.ledger());
    return states;
}

namespace {

struct ExpEulerCtx {
    const model::ExpEulerProblem& problem;
    std::uint64_t seed;
    int M;
};

double exp_euler_rec(const ExpEulerCtx& ctx, const rng::MultiIndex& theta, int k, int n,
                     std::span<const double> x, CostLedger& ledger, int width) {
    if (n == 0) return 0.0;
    const auto& grid = ctx.problem.grid;
    const int d = ctx.problem.d;
    const double t_k = grid.at(k);

    bool of = false;  // authorization upfront rules out overflow
    const std::uint64_t m_pow_n = ipow_u64(static_cast<std::uint64_t>(ctx.M), n, &of);
    (void)of;

    // Base level: one increment of variance t_k per sample.
    auto base_parts = parallel_blocks<PartialSum>(
        m_pow_n, kBaseBlock, width, [&](std::size_t begin, std::size_t end) {
            PartialSum part;
            std::vector<double> y(static_cast<std::size_t>(d));
            for (std::size_t m = begin; m < end; ++m) {
                const auto label = static_cast<std::int64_t>(m) + 1;
                rng::RandomStream stream(rng::StreamKey{
                    ctx.seed, theta.child(0, -label), rng::Channel::brownian});
                stream.normals_at(0, y, t_k);
                for (int i = 0; i < d; ++i) y[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
                part.sum += ctx.problem.terminal(y);
                part.ledger.merge(stream.ledger());
            }
            return part;
        });
    double base_sum = 0.0;
    for (const auto& part : base_parts) {
        base_sum += part.sum;
        ledger.merge(part.ledger);
    }
    double value =
        base_sum / static_cast<double>(m_pow_n) + t_k * ctx.problem.f_zero;

    // Correction levels, ascending j; each bracket reuses one increment for
    // both sub-estimators and is weighted by t_k.
    for (int j = 1; j <= n - 1; ++j) {
        bool of_j = false;
        const std::uint64_t m_pow = ipow_u64(static_cast<std::uint64_t>(ctx.M), n - j, &of_j);
        (void)of_j;
        auto parts = parallel_blocks<PartialSum>(
            m_pow, kCorrBlock, width, [&](std::size_t begin, std::size_t end) {
                PartialSum part;
                std::vector<double> y(static_cast<std::size_t>(d));
                for (std::size_t m = begin; m < end; ++m) {
                    const auto label = static_cast<std::int64_t>(m) + 1;
                    const rng::MultiIndex theta_plus = theta.child(j, label);
                    const rng::MultiIndex theta_minus = theta.child(j, -label);

                    rng::RandomStream index_stream(rng::StreamKey{
                        ctx.seed, theta_plus, rng::Channel::index});
                    const double u = index_stream.u01_at(0);
                    const int l = k == 0 ? 0 : model::sample_index(grid, k, u);

                    rng::RandomStream brownian(rng::StreamKey{
                        ctx.seed, theta_plus, rng::Channel::brownian});
                    brownian.normals_at(0, y, t_k - grid.at(l));
                    for (int i = 0; i < d; ++i) {
                        y[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
                    }

                    const double v_plus =
                        exp_euler_rec(ctx, theta_plus, l, j, y, part.ledger, 1);
                    const double v_minus =
                        exp_euler_rec(ctx, theta_minus, l, j - 1, y, part.ledger, 1);
                    part.sum += ctx.problem.f(v_plus) - ctx.problem.f(v_minus);
                    part.ledger.merge(index_stream.ledger());
                    part.ledger.merge(brownian.ledger());
                }
                return part;
            });
        double level_sum = 0.0;
        for (const auto& part : parts) {
            level_sum += part.sum;
            ledger.merge(part.ledger);
        }
        value += t_k * level_sum / static_cast<double>(m_pow);
    }
    return value;
}

struct GeneralCtx {
    const model::ProblemSpec& spec;
    const model::IndexDistribution& dist;
    std::uint64_t seed;
    int M;
};

double general_rec(const GeneralCtx& ctx, const rng::MultiIndex& theta, int k, int n,
                   std::span<const double> x, CostLedger& ledger, int width) {
    if (n == 0) return 0.0;
    const auto& spec = ctx.spec;

    bool of = false;  // authorization upfront rules out overflow
    const std::uint64_t m_pow_n = ipow_u64(static_cast<std::uint64_t>(ctx.M), n, &of);
    (void)of;

    // Base level: an independent path for g and another for the f(.,0) sum.
    auto base_parts = parallel_blocks<PartialSum>(
        m_pow_n, kBaseBlock, width, [&](std::size_t begin, std::size_t end) {
            PartialSum part;
            for (std::size_t m = begin; m < end; ++m) {
                const auto label = static_cast<std::int64_t>(m) + 1;
                const auto x0 = simulate_x(spec, theta.child(0, -label), ctx.seed, k, 0, x,
                                           part.ledger);
                double sample = spec.terminal(x0);
                if (k > 0) {
                    const auto path = simulate_x_path(spec, theta.child(0, label), ctx.seed, k,
                                                      0, x, part.ledger);
                    for (int l = 0; l < k; ++l) {
                        sample += spec.nonlinearity(l, path[static_cast<std::size_t>(l)], 0.0);
                    }
                }
                part.sum += sample;
            }
            return part;
        });
    double base_sum = 0.0;
    for (const auto& part : base_parts) {
        base_sum += part.sum;
        ledger.merge(part.ledger);
    }
    double value = base_sum / static_cast<double>(m_pow_n);

    if (k == 0) return value;  // correction levels carry the indicator 1_N(k)

    for (int j = 1; j <= n - 1; ++j) {
        bool of_j = false;
        const std::uint64_t m_pow = ipow_u64(static_cast<std::uint64_t>(ctx.M), n - j, &of_j);
        (void)of_j;
        auto parts = parallel_blocks<PartialSum>(
            m_pow, kCorrBlock, width, [&](std::size_t begin, std::size_t end) {
                PartialSum part;
                for (std::size_t m = begin; m < end; ++m) {
                    const auto label = static_cast<std::int64_t>(m) + 1;
                    const rng::MultiIndex theta_plus = theta.child(j, label);
                    const rng::MultiIndex theta_minus = theta.child(j, -label);

                    rng::RandomStream index_stream(rng::StreamKey{
                        ctx.seed, theta_plus, rng::Channel::index});
                    const int l = model::sample_index(spec.grid, k, index_stream.u01_at(0));

                    const auto state =
                        simulate_x(spec, theta_plus, ctx.seed, k, l, x, part.ledger);

                    const double v_plus =
                        general_rec(ctx, theta_plus, l, j, state, part.ledger, 1);
                    const double v_minus =
                        general_rec(ctx, theta_minus, l, j - 1, state, part.ledger, 1);
                    const double bracket =
                        (spec.nonlinearity(l, state, v_plus) - v_plus) -
                        (spec.nonlinearity(l, state, v_minus) - v_minus);
                    part.sum += bracket / ctx.dist.weight(k, l);
                    part.ledger.merge(index_stream.ledger());
                }
                return part;
            });
        double level_sum = 0.0;
        for (const auto& part : parts) {
            level_sum += part.sum;
            ledger.merge(part.ledger);
        }
        value += level_sum / static_cast<double>(m_pow);
    }
    return value;
}

std::vector<double> effective_point(std::span<const double> x,
                                    const std::vector<double>& fallback) {
    if (x.empty()) return fallback;
    return std::vector<double>(x.begin(), x.end());
}

}  // namespace

Estimate mlp_general(const model::ProblemSpec& spec, const model::IndexDistribution& dist,
                     const rng::MultiIndex& theta, int k, const MlpParams& params,
                     std::span<const double> x) {
    if (k < 0 || k > spec.grid.steps()) throw std::domain_error("mlp_general: k out of range");
    if (params.levels < 0) throw std::domain_error("mlp_general: n must be >= 0");
    if (params.branching < 1) throw std::domain_error("mlp_general: M must be >= 1");

    authorize(cost_bound_general_path(spec.step_normals, k, params.branching, params.levels),
              params.max_total_samples);

    const auto point = effective_point(x, spec.eval_point);
    Estimate est;
    est.params = {spec.d, spec.grid.steps(), params.branching, params.levels, k, params.seed};
    const auto start = std::chrono::steady_clock::now();
    GeneralCtx ctx{spec, dist, params.seed, params.branching};
    est.value = general_rec(ctx, theta, k, params.levels, point, est.ledger,
                            params.parallel_width);
    est.ledger.wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                             start)
            .count());
    return est;
}

Estimate mlp_exp_euler(const model::ExpEulerProblem& problem, const rng::MultiIndex& theta,
                       int k, const MlpParams& params, std::span<const double> x) {
    if (k < 0 || k > problem.grid.steps()) {
        throw std::domain_error("mlp_exp_euler: k out of range");
    }
    if (params.levels < 0) throw std::domain_error("mlp_exp_euler: n must be >= 0");
    if (params.branching < 1) throw std::domain_error("mlp_exp_euler: M must be >= 1");

    authorize(cost_predict(problem.d, problem.grid.steps(), params.branching, params.levels,
                           problem.d),
              params.max_total_samples);

    const auto point = effective_point(x, problem.eval_point);
    Estimate est;
    est.params = {problem.d, problem.grid.steps(), params.branching, params.levels, k,
                  params.seed};
    const auto start = std::chrono::steady_clock::now();
    ExpEulerCtx ctx{problem, params.seed, params.branching};
    est.value = exp_euler_rec(ctx, theta, k, params.levels, point, est.ledger,
                              params.parallel_width);
    est.ledger.wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() -
                                                             start)
            .count());
    return est;
}

}  // namespace mlpmc::engine

namespace mlpmc {
int hardware_width() {
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}
}  // namespace mlpmc
