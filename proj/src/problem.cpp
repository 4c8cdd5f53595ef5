#include "mlpmc/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "mlpmc/rng_stream.hpp"

namespace mlpmc::model {

ExpEulerProblem make_exp_euler(int d, int K, double T, ScalarFn f, double lip_f, TerminalFn v0,
                               std::vector<double> eval_point) {
    if (d < 1) throw std::domain_error("exp euler: dimension must be positive");
    if (K < 1) throw std::domain_error("exp euler: step count must be positive");
    if (!(T > 0.0)) throw std::domain_error("exp euler: horizon must be positive");
    if (lip_f < 0.0) throw std::domain_error("exp euler: Lipschitz constant must be >= 0");
    ExpEulerProblem p;
    p.d = d;
    p.grid = TimeGrid::uniform(K, T);
    p.f = std::move(f);
    p.lip_f = lip_f;
    p.f_zero = p.f(0.0);
    p.terminal = std::move(v0);
    if (eval_point.empty()) eval_point.assign(static_cast<std::size_t>(d), 0.0);
    if (eval_point.size() != static_cast<std::size_t>(d)) {
        throw std::domain_error("exp euler: eval point has wrong dimension");
    }
    p.eval_point = std::move(eval_point);
    return p;
}

ProblemSpec make_exp_euler_problem(const ExpEulerProblem& problem) {
    ProblemSpec spec;
    spec.grid = problem.grid;
    spec.d = problem.d;
    spec.step_normals = problem.d;
    const TimeGrid grid = problem.grid;
    spec.dynamics = [grid](int k, std::span<const double> x, std::span<const double> z,
                           std::span<double> out) {
        const double s = std::sqrt(grid.spacing(k));
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + s * z[i];
    };
    const ScalarFn f = problem.f;
    spec.nonlinearity = [grid, f](int k, std::span<const double>, double a) {
        return a + grid.spacing(k) * f(a);
    };
    spec.terminal = problem.terminal;
    const int K = problem.grid.steps();
    spec.lipschitz.resize(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        spec.lipschitz[static_cast<std::size_t>(k)] = problem.grid.spacing(k) * problem.lip_f;
    }
    spec.eval_point = problem.eval_point;
    spec.cost_alpha = 0.0;
    spec.cost_gamma = 1.0;
    spec.cost_p = 1.0;
    return spec;
}

RegistryNonlinearity make_nonlinearity(const NonlinearitySpec& spec) {
    RegistryNonlinearity out;
    if (spec.kind == "zero") {
        out.f = [](double) { return 0.0; };
        out.lip = 0.0;
    } else if (spec.kind == "constant") {
        const double c = spec.beta;
        out.f = [c](double) { return c; };
        out.lip = 0.0;
    } else if (spec.kind == "affine") {
        const double alpha = spec.alpha;
        const double beta = spec.beta;
        out.f = [alpha, beta](double a) { return alpha * a + beta; };
        out.lip = std::fabs(alpha);
    } else if (spec.kind == "sin") {
        const double s = spec.scale;
        out.f = [s](double a) { return s * std::sin(a); };
        out.lip = std::fabs(s);
    } else if (spec.kind == "scaled_cos") {
        const double s = spec.scale;
        out.f = [s](double a) { return s * std::cos(a); };
        out.lip = std::fabs(s);
    } else {
        throw std::invalid_argument("unknown nonlinearity kind: " + spec.kind);
    }
    out.at_zero = out.f(0.0);
    return out;
}

TerminalFn make_terminal(const TerminalSpec& spec) {
    if (spec.kind == "constant") {
        const double c = spec.value;
        return [c](std::span<const double>) { return c; };
    }
    if (spec.kind == "quadratic") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (const double v : x) s += v * v;
            return s;
        };
    }
    if (spec.kind == "gaussian_bump") {
        return [](std::span<const double> x) {
            double s = 0.0;
            for (const double v : x) s += v * v;
            return std::exp(-0.5 * s);
        };
    }
    throw std::invalid_argument("unknown terminal kind: " + spec.kind);
}

TerminalBatchFn make_terminal_batch(const TerminalSpec& spec) {
    if (spec.kind == "constant") {
        const double c = spec.value;
        return [c](const double*, std::size_t n, std::size_t, double* out) {
            for (std::size_t i = 0; i < n; ++i) out[i] = c;
        };
    }
    if (spec.kind == "quadratic") {
        return [](const double* xs, std::size_t n, std::size_t dim, double* out) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim; ++j) s += xs[i * dim + j] * xs[i * dim + j];
                out[i] = s;
            }
        };
    }
    if (spec.kind == "gaussian_bump") {
        return [](const double* xs, std::size_t n, std::size_t dim, double* out) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim; ++j) s += xs[i * dim + j] * xs[i * dim + j];
                out[i] = std::exp(-0.5 * s);
            }
        };
    }
    throw std::invalid_argument("unknown terminal kind: " + spec.kind);
}

namespace {

// (E |v0(xi + W_T)|^2)^{1/2} for the registry terminals, in closed form.
double terminal_kappa(const TerminalSpec& term, std::span<const double> xi, double T) {
    if (term.kind == "constant") return std::fabs(term.value);
    if (term.kind == "quadratic") {
        // ||xi + W||^2 is a sum of independent (xi_i + W_i)^2 terms.
        double mean = 0.0;
        double var = 0.0;
        for (const double c : xi) {
            mean += c * c + T;
            var += 4.0 * c * c * T + 2.0 * T * T;
        }
        return std::sqrt(var + mean * mean);
    }
    if (term.kind == "gaussian_bump") {
        // E exp(-(xi_i + W_i)^2) = (1+2T)^{-1/2} exp(-xi_i^2/(1+2T)) per axis.
        double second = 1.0;
        for (const double c : xi) {
            second *= std::exp(-c * c / (1.0 + 2.0 * T)) / std::sqrt(1.0 + 2.0 * T);
        }
        return std::sqrt(second);
    }
    throw std::invalid_argument("unknown terminal kind: " + term.kind);
}

}  // namespace

ExpEulerProblem make_registry_problem(int d, int K, double T, const NonlinearitySpec& nl,
                                      const TerminalSpec& term, std::vector<double> eval_point) {
    RegistryNonlinearity rnl = make_nonlinearity(nl);
    ExpEulerProblem p = make_exp_euler(d, K, T, std::move(rnl.f), rnl.lip, make_terminal(term),
                                       std::move(eval_point));
    p.f_zero = rnl.at_zero;
    p.terminal_batch = make_terminal_batch(term);
    p.kappa_v0 = terminal_kappa(term, p.eval_point, T);
    p.id = nl.kind + "_" + term.kind;
    return p;
}

LipschitzReport validate_lipschitz(const ProblemSpec& spec, int probes, std::uint64_t seed) {
    if (probes < 1) throw std::domain_error("validate_lipschitz: probes must be >= 1");
    LipschitzReport report;
    report.probes = probes;

    rng::RandomStream stream(rng::StreamKey{seed, rng::MultiIndex{0}, rng::Channel::index});
    const int K = spec.grid.steps();
    std::vector<double> x(static_cast<std::size_t>(spec.d));
    const double spread = std::sqrt(spec.grid.horizon());

    for (int p = 0; p < probes; ++p) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            // Probe states spread around the eval point at the scale the
            // dynamics actually reach.
            x[i] = spec.eval_point[i] +
                   spread * rng::kernels::normal_quantile_one(stream.next_u01());
        }
        const double a = 20.0 * stream.next_u01() - 10.0;
        const double b = 20.0 * stream.next_u01() - 10.0;
        const int k = static_cast<int>(stream.next_u01() * K);
        const int step = k >= K ? K - 1 : k;
        const double ga = spec.nonlinearity(step, x, a) - a;
        const double gb = spec.nonlinearity(step, x, b) - b;
        const double observed = std::fabs(ga - gb);
        const double allowed =
            spec.lipschitz[static_cast<std::size_t>(step)] * std::fabs(a - b) +
            1e-9 * std::fabs(a - b);
        if (observed > allowed) {
            report.violations.push_back({step, a, b, observed, allowed});
        }
    }
    return report;
}

}  // namespace mlpmc::model
