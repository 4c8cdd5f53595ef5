// Command-line front end: load a problem config, run estimates, the
// validation suite, convergence and complexity experiments, or the oracles,
// and emit reproducible CSV. Exit codes: 0 success, 1 validation failure,
// 2 config error, 3 budget refusal.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "mlpmc/analysis.hpp"
#include "mlpmc/config.hpp"
#include "mlpmc/csv.hpp"
#include "mlpmc/engine.hpp"
#include "mlpmc/errors.hpp"
#include "mlpmc/oracles.hpp"
#include "mlpmc/parallel.hpp"
#include "mlpmc/rng_stream.hpp"

namespace {

using namespace mlpmc;

int resolve_threads(const cli::ExperimentConfig& cfg, int flag_threads) {
    if (flag_threads > 0) return flag_threads;
    if (const char* env = std::getenv("MLPMC_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (cfg.threads > 0) return cfg.threads;
    return hardware_width();
}

bool is_affine_kind(const std::string& kind) {
    return kind == "zero" || kind == "constant" || kind == "affine";
}

// Affine view of a registry nonlinearity: f(a) = alpha a + beta.
struct AffineView {
    double alpha = 0.0;
    double beta = 0.0;
};

AffineView affine_view(const model::NonlinearitySpec& nl) {
    if (nl.kind == "zero") return {0.0, 0.0};
    if (nl.kind == "constant") return {0.0, nl.beta};
    return {nl.alpha, nl.beta};
}

int run_estimate(const cli::ExperimentConfig& cfg, int threads) {
    const auto problem = cfg.build_problem();
    cli::CsvWriter csv({"problem_id", "d", "K", "T", "M", "n", "seed", "estimate", "normals",
                        "uniforms", "wall_ms"});
    for (const int M : cfg.m_list) {
        for (const int n : cfg.n_list) {
            for (int run = 0; run < cfg.runs; ++run) {
                engine::MlpParams params;
                params.branching = M;
                params.levels = n;
                params.seed = cfg.seed + 1 + static_cast<std::uint64_t>(run);
                params.max_total_samples = cfg.max_samples;
                params.parallel_width = threads;
                const auto est =
                    engine::mlp_exp_euler(problem, rng::MultiIndex{0}, cfg.K, params);
                csv.add(problem.id);
                csv.add(cfg.d);
                csv.add(cfg.K);
                csv.add(cfg.T);
                csv.add(M);
                csv.add(n);
                csv.add(params.seed);
                csv.add(est.value);
                csv.add(est.ledger.normals);
                csv.add(est.ledger.uniforms);
                csv.add(static_cast<double>(est.ledger.wall_ns) * 1e-6);
                csv.end_row();
            }
        }
    }
    csv.write_to(cfg.out_path);
    return 0;
}

int run_oracle(const cli::ExperimentConfig& cfg, int threads) {
    const auto problem = cfg.build_problem();
    cli::CsvWriter csv({"method", "k", "value", "error_radius", "normals", "uniforms"});

    if (is_affine_kind(cfg.nonlinearity.kind) && cfg.terminal.kind == "constant") {
        const auto view = affine_view(cfg.nonlinearity);
        const auto r = oracles::exact_affine(cfg.K, cfg.T, view.alpha, view.beta,
                                             cfg.terminal.value);
        csv.add(std::string("closed_form"));
        csv.add(cfg.K);
        csv.add(r.value);
        csv.add(r.error_radius);
        csv.add(std::uint64_t{0});
        csv.add(std::uint64_t{0});
        csv.end_row();
    }
    if (cfg.d == 1) {
        const auto q =
            oracles::quadrature_1d(problem, cfg.quadrature_points, cfg.hermite_nodes);
        csv.add(std::string("quadrature"));
        csv.add(cfg.K);
        csv.add(q.at_eval.value);
        csv.add(q.at_eval.error_radius);
        csv.add(std::uint64_t{0});
        csv.add(std::uint64_t{0});
        csv.end_row();
    }
    const int k_nested = std::min(cfg.K, 3);
    const auto nested = oracles::nested_mc(problem, k_nested, {}, cfg.nested_m,
                                           cfg.seed + 1000, threads);
    csv.add(std::string("nested_mc"));
    csv.add(k_nested);
    csv.add(nested.value);
    csv.add(nested.error_radius);
    csv.add(nested.ledger.normals);
    csv.add(nested.ledger.uniforms);
    csv.end_row();

    csv.write_to(cfg.out_path);
    return 0;
}

int run_converge(const cli::ExperimentConfig& cfg, int threads) {
    const auto problem = cfg.build_problem();

    oracles::OracleResult reference;
    if (is_affine_kind(cfg.nonlinearity.kind) && cfg.terminal.kind == "constant") {
        const auto view = affine_view(cfg.nonlinearity);
        reference =
            oracles::exact_affine(cfg.K, cfg.T, view.alpha, view.beta, cfg.terminal.value);
    } else if (cfg.d == 1) {
        reference =
            oracles::quadrature_1d(problem, cfg.quadrature_points, cfg.hermite_nodes).at_eval;
    } else {
        throw ConfigError("converge: no reference oracle for this problem (need affine or d=1)");
    }

    std::vector<std::pair<int, int>> grid;
    for (const int M : cfg.m_list) {
        for (const int n : cfg.n_list) grid.emplace_back(M, n);
    }
    analysis::RmseOptions options;
    options.runs = cfg.runs;
    options.seed = cfg.seed;
    options.parallel_width = threads;
    options.max_total_samples = cfg.max_samples;
    const auto rows = analysis::rmse_experiment(problem, grid, reference, options);

    cli::CsvWriter csv({"M", "N", "rmse", "stderr", "bound", "normals_mean"});
    for (const auto& row : rows) {
        if (row.reference_radius_warning) {
            std::cerr << "warning: reference radius " << reference.error_radius
                      << " is not small against rmse " << row.rmse << " at (M,N)=(" << row.M
                      << "," << row.N << ")\n";
        }
        csv.add(row.M);
        csv.add(row.N);
        csv.add(row.rmse);
        csv.add(row.stderr_jackknife);
        csv.add(row.bound);
        csv.add(row.normals_mean);
        csv.end_row();
    }
    csv.write_to(cfg.out_path);
    return 0;
}

int run_complexity(const cli::ExperimentConfig& cfg) {
    const auto problem = cfg.build_problem();
    const double c = problem.coupling();
    const double kappa = problem.kappa_v0 + cfg.T * std::fabs(problem.f_zero);
    const auto table = analysis::complexity_experiment(cfg.d_list, cfg.eps_list, cfg.delta, c,
                                                       kappa, cfg.K, 0.0, 1.0);
    cli::CsvWriter csv({"d", "eps", "N_selected", "cost_predicted", "cost_bound", "normalized"});
    for (const auto& row : table.rows) {
        csv.add(row.d);
        csv.add(row.eps);
        csv.add(row.N);
        csv.add(row.cost_total);
        csv.add(row.bound);
        csv.add(row.normalized);
        csv.end_row();
    }
    csv.write_to(cfg.out_path);
    return 0;
}

struct CheckReport {
    bool all_ok = true;
    void report(const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        all_ok = all_ok && ok;
    }
};

int run_validate(const cli::ExperimentConfig& cfg, int threads) {
    const auto problem = cfg.build_problem();
    const auto general = model::make_exp_euler_problem(problem);
    CheckReport report;

    {
        const auto lip = model::validate_lipschitz(general, 2000, cfg.seed + 77);
        report.report("lipschitz_probe", lip.ok(),
                      std::to_string(lip.violations.size()) + " violations / " +
                          std::to_string(lip.probes) + " probes");
    }

    {
        // Empirical law of sample_index vs the grid pmf, 4 sigma per atom.
        const auto dist = model::make_grid_index_distribution(problem.grid);
        const int k = cfg.K;
        const int draws = 1000000;
        std::vector<std::uint64_t> hits(static_cast<std::size_t>(k), 0);
        rng::RandomStream stream(
            rng::StreamKey{cfg.seed + 31, rng::MultiIndex{7}, rng::Channel::index});
        for (int i = 0; i < draws; ++i) {
            ++hits[static_cast<std::size_t>(model::sample_index(problem.grid, k,
                                                                stream.next_u01()))];
        }
        bool ok = true;
        double worst = 0.0;
        for (int l = 0; l < k; ++l) {
            const double p = dist.prob(k, l);
            const double sigma = std::sqrt(p * (1.0 - p) * draws);
            const double dev =
                std::fabs(static_cast<double>(hits[static_cast<std::size_t>(l)]) - p * draws);
            const double pulls = sigma > 0.0 ? dev / sigma : dev;
            worst = std::max(worst, pulls);
            ok = ok && pulls <= 4.0;
        }
        report.report("index_distribution_chi2", ok,
                      "worst atom at " + cli::format_double(worst) + " sigma");
    }

    const bool affine_case =
        is_affine_kind(cfg.nonlinearity.kind) && cfg.terminal.kind == "constant";
    oracles::OracleResult reference;
    bool have_reference = false;

    if (affine_case) {
        const auto view = affine_view(cfg.nonlinearity);
        reference =
            oracles::exact_affine(cfg.K, cfg.T, view.alpha, view.beta, cfg.terminal.value);
        have_reference = true;
    }

    if (cfg.d == 1) {
        const auto quad =
            oracles::quadrature_1d(problem, cfg.quadrature_points, cfg.hermite_nodes);
        if (affine_case) {
            const double gap = std::fabs(quad.at_eval.value - reference.value);
            report.report("oracle_closed_form_vs_quadrature",
                          gap <= quad.at_eval.error_radius + 1e-12,
                          "gap " + cli::format_double(gap));
        }
        const int k_nested = std::min(cfg.K, 3);
        const auto nested = oracles::nested_mc(problem, k_nested, {}, cfg.nested_m,
                                               cfg.seed + 1000, threads);
        const double quad_at_k = quad.table.value(k_nested, problem.eval_point[0]);
        const double gap = std::fabs(nested.value - quad_at_k);
        report.report("oracle_quadrature_vs_nested_mc",
                      gap <= nested.error_radius + quad.at_eval.error_radius + 1e-12,
                      "gap " + cli::format_double(gap) + " vs radius " +
                          cli::format_double(nested.error_radius));
        if (!have_reference) {
            reference = quad.at_eval;
            have_reference = true;
        }

        double worst_tel = 0.0;
        for (const auto& [k, l] : std::vector<std::pair<int, int>>{
                 {cfg.K, 0}, {cfg.K, cfg.K / 2}, {cfg.K / 2, cfg.K / 2}}) {
            worst_tel = std::max(worst_tel,
                                 oracles::telescoping_check(problem, quad.table, k, l));
        }
        report.report("telescoping_identity", worst_tel <= 1e-8,
                      "max deviation " + cli::format_double(worst_tel));

        const auto apriori = oracles::apriori_bound_check(problem, quad.table);
        report.report("apriori_moment_bound", apriori.ok(),
                      cli::format_double(apriori.lhs_max) + " <= " +
                          cli::format_double(apriori.rhs));
    }

    {
        // MLP against the best available reference, within combined radii.
        // With only the nested oracle available the comparison runs at its
        // depth, so both sides estimate the same v_k.
        double reference_value = 0.0;
        double radius = 0.0;
        int k_ref = cfg.K;
        if (have_reference) {
            reference_value = reference.value;
            radius = reference.error_radius;
        } else {
            k_ref = std::min(cfg.K, 3);
            const auto nested = oracles::nested_mc(problem, k_ref, {}, cfg.nested_m,
                                                   cfg.seed + 1000, threads);
            reference_value = nested.value;
            radius = nested.error_radius;
        }

        const int M = cfg.m_list.front();
        const int N = cfg.n_list.front();
        const int runs = std::max(cfg.runs, 50);
        double sum = 0.0;
        for (int r = 0; r < runs; ++r) {
            engine::MlpParams params;
            params.branching = M;
            params.levels = N;
            params.seed = cfg.seed + 1 + static_cast<std::uint64_t>(r);
            params.max_total_samples = cfg.max_samples;
            params.parallel_width = threads;
            sum += engine::mlp_exp_euler(problem, rng::MultiIndex{0}, k_ref, params).value;
        }
        const double mean = sum / runs;
        // Statistical tolerance: bound-based slack dominates at small runs.
        const double bound = analysis::error_bound_exp_euler(
            M, N, cfg.K, problem.lip_f, cfg.T, problem.kappa_v0, std::fabs(problem.f_zero));
        const double tol = radius + 4.0 * bound / std::sqrt(static_cast<double>(runs));
        const double gap = std::fabs(mean - reference_value);
        report.report("mlp_vs_reference", gap <= tol,
                      "gap " + cli::format_double(gap) + " tol " + cli::format_double(tol));
    }

    return report.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilevel Picard estimation of iterated nested expectations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    std::uint64_t max_samples_override = 0;
    int threads_flag = 0;

    for (const auto& name : {"estimate", "validate", "converge", "complexity", "oracle"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--seed", seed_override, "override config seed")
            ->each([&seed_given](const std::string&) { seed_given = true; });
        sub->add_option("--out", out_override, "override output path");
        sub->add_option("--threads", threads_flag,
                        "worker threads (also MLPMC_THREADS env; 0 = hardware)");
        sub->add_option("--max-samples", max_samples_override,
                        "override scalar-draw budget cap");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto cfg = cli::parse_config_file(config_path);
        if (seed_given) cfg.seed = seed_override;
        if (!out_override.empty()) cfg.out_path = out_override;
        if (max_samples_override > 0) cfg.max_samples = max_samples_override;
        const int threads = resolve_threads(cfg, threads_flag);
        // The config's mode records intent; the subcommand wins.
        const std::string mode = app.get_subcommands().front()->get_name();
        if (mode == "estimate") return run_estimate(cfg, threads);
        if (mode == "validate") return run_validate(cfg, threads);
        if (mode == "converge") return run_converge(cfg, threads);
        if (mode == "complexity") return run_complexity(cfg);
        if (mode == "oracle") return run_oracle(cfg, threads);
        std::cerr << "unknown mode: " << mode << "\n";
        return 2;
    } catch (const BudgetError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
