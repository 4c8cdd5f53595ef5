#include "mlpmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mlpmc/parallel.hpp"

namespace mlpmc::analysis {

double error_bound_general(const BoundInputs& b) {
    if (b.M < 1) throw std::domain_error("error_bound_general: M must be >= 1");
    return std::exp(0.5 * b.M + b.lipschitz_sum) *
           std::pow(static_cast<double>(b.M), -0.5 * b.N) *
           std::pow(1.0 + 2.0 * b.max_ratio, b.N) * b.kappa;
}

double error_bound_exp_euler(int M, int N, int K, double lip_f, double T, double kappa_v0,
                             double f_at_zero_abs, ExpEulerScheme scheme) {
    if (M < 1) throw std::domain_error("error_bound_exp_euler: M must be >= 1");
    const double lt = scheme == ExpEulerScheme::weighted ? lip_f * T : lip_f * K;
    const double bracket = scheme == ExpEulerScheme::weighted
                               ? kappa_v0 + T * f_at_zero_abs
                               : kappa_v0 + K * f_at_zero_abs;
    return std::exp(lt + 0.5 * M) * std::pow(1.0 + 2.0 * lt, N) *
           std::pow(static_cast<double>(M), -0.5 * N) * bracket;
}

double cost_bound(const ComplexityInputs& ci) {
    return 0.5 * (1.0 + 3.0 * ci.gamma) * std::pow(static_cast<double>(ci.d), ci.p) *
           std::pow(static_cast<double>(ci.K), ci.alpha) *
           std::pow(3.0 * ci.M, static_cast<double>(ci.n));
}

int select_levels(double eps, double c, double kappa) {
    if (!(eps > 0.0) || eps > 1.0) throw std::domain_error("select_levels: eps outside (0,1]");
    if (c < 0.0 || kappa < 0.0) throw std::domain_error("select_levels: negative inputs");
    for (int n = 1;; ++n) {
        // log certificate: log kappa + c + n(1/2 + log(1+2c)) - (n/2) log n
        const double cert = kappa == 0.0
                                ? -std::numeric_limits<double>::infinity()
                                : std::log(kappa) + c +
                                      n * (0.5 + std::log1p(2.0 * c)) -
                                      0.5 * n * std::log(static_cast<double>(n));
        if (cert <= std::log(eps)) return n;
    }
}

double jackknife_rmse_stderr(const std::vector<double>& squared_errors) {
    const auto n = static_cast<double>(squared_errors.size());
    if (squared_errors.size() < 2) return 0.0;
    double total = 0.0;
    for (const double s : squared_errors) total += s;

    // Leave-one-out RMSE estimates from the shared sum of squares.
    double mean_loo = 0.0;
    std::vector<double> loo(squared_errors.size());
    for (std::size_t i = 0; i < squared_errors.size(); ++i) {
        loo[i] = std::sqrt(std::max(0.0, (total - squared_errors[i]) / (n - 1.0)));
        mean_loo += loo[i];
    }
    mean_loo /= n;
    double ss = 0.0;
    for (const double v : loo) ss += (v - mean_loo) * (v - mean_loo);
    return std::sqrt((n - 1.0) / n * ss);
}

std::vector<RmseRow> rmse_experiment(const model::ExpEulerProblem& problem,
                                     const std::vector<std::pair<int, int>>& mn_grid,
                                     const oracles::OracleResult& reference,
                                     const RmseOptions& options) {
    if (options.runs < 2) throw std::domain_error("rmse_experiment: need at least 2 runs");
    std::vector<RmseRow> rows;
    rows.reserve(mn_grid.size());
    const int K = problem.grid.steps();

    for (const auto& cell : mn_grid) {
        const int M = cell.first;
        const int N = cell.second;
        struct Part {
            double sum = 0.0;
            std::vector<double> values;
            std::uint64_t normals = 0;
        };
        auto parts = parallel_blocks<Part>(
            static_cast<std::size_t>(options.runs), 4, options.parallel_width,
            [&](std::size_t begin, std::size_t end) {
                Part part;
                for (std::size_t r = begin; r < end; ++r) {
                    engine::MlpParams params;
                    params.branching = M;
                    params.levels = N;
                    params.seed = options.seed + 1 + r;
                    params.max_total_samples = options.max_total_samples;
                    params.parallel_width = 1;
                    const auto est =
                        engine::mlp_exp_euler(problem, rng::MultiIndex{0}, K, params);
                    part.values.push_back(est.value);
                    part.sum += est.value;
                    part.normals += est.ledger.normals;
                }
                return part;
            });

        RmseRow row;
        row.M = M;
        row.N = N;
        row.runs = options.runs;
        row.reference = reference.value;
        std::vector<double> sq;
        sq.reserve(static_cast<std::size_t>(options.runs));
        double sum = 0.0;
        std::uint64_t normals = 0;
        for (const auto& part : parts) {
            sum += part.sum;
            normals += part.normals;
            for (const double v : part.values) {
                const double e = v - reference.value;
                sq.push_back(e * e);
            }
        }
        if (!std::isfinite(problem.kappa_v0)) {
            throw std::domain_error("rmse_experiment: problem.kappa_v0 must be supplied");
        }
        row.mean = sum / options.runs;
        double msq = 0.0;
        for (const double s : sq) msq += s;
        row.rmse = std::sqrt(msq / options.runs);
        row.stderr_jackknife = jackknife_rmse_stderr(sq);
        row.bound = error_bound_exp_euler(M, N, K, problem.lip_f, problem.horizon(),
                                          problem.kappa_v0, std::fabs(problem.f_zero));
        row.normals_mean = static_cast<double>(normals) / options.runs;
        row.reference_radius_warning = reference.error_radius > row.rmse / 10.0;
        rows.push_back(row);
    }
    return rows;
}

ComplexityTable complexity_experiment(const std::vector<int>& dims,
                                      const std::vector<double>& eps_list, double delta,
                                      double coupling_c, double kappa, int K, double cost_alpha,
                                      double cost_p) {
    ComplexityTable table;
    for (const double eps : eps_list) {
        if (!(eps > 0.0) || eps > 1.0) {
            throw std::domain_error("complexity_experiment: eps outside (0,1]");
        }
        const int N = select_levels(eps, coupling_c, kappa);
        for (const int d : dims) {
            const auto cost = engine::cost_predict(d, K, N, N, d);
            ComplexityRow row;
            row.d = d;
            row.eps = eps;
            row.N = N;
            row.cost_normals = cost.normals_approx;
            row.cost_uniforms = cost.uniforms_approx;
            row.cost_total = cost.total_approx();
            row.bound = cost_bound({1.0, 0.0, 1.0, d, K, N, N});
            row.normalized = row.cost_total * std::pow(eps, 2.0 + delta) /
                             (std::pow(static_cast<double>(d), cost_p) *
                              std::pow(static_cast<double>(K), cost_alpha));
            table.rows.push_back(row);
        }
    }
    std::vector<double> normalized;
    normalized.reserve(table.rows.size());
    for (const auto& row : table.rows) normalized.push_back(row.normalized);
    std::sort(normalized.begin(), normalized.end());
    if (!normalized.empty()) {
        table.max_normalized = normalized.back();
        table.median_normalized = normalized[normalized.size() / 2];
    }
    return table;
}

}  // namespace mlpmc::analysis
