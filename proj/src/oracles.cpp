#include "mlpmc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mlpmc/parallel.hpp"
#include "mlpmc/rng_stream.hpp"

namespace mlpmc::oracles {

OracleResult exact_affine(int K, double T, double alpha, double beta, double c0) {
    if (K < 1) throw std::domain_error("exact_affine: K must be >= 1");
    if (!(T > 0.0)) throw std::domain_error("exact_affine: T must be positive");
    const double h = T / K;
    const double rho = 1.0 + alpha * h;
    // v_K = rho^K c0 + beta h (rho^K - 1)/(rho - 1); the geometric factor is
    // summed termwise, which also covers rho == 1.
    double rho_pow = 1.0;
    double geom = 0.0;
    for (int i = 0; i < K; ++i) {
        geom += rho_pow;
        rho_pow *= rho;
    }
    OracleResult out;
    out.method = OracleMethod::closed_form;
    out.value = rho_pow * c0 + beta * h * geom;
    out.error_radius = 0.0;
    return out;
}

GaussHermiteRule gauss_hermite(int points) {
    if (points < 1) throw std::domain_error("gauss_hermite: need at least one node");
    const int n = points;
    GaussHermiteRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);

    const double kPiQuarter = 0.7511255444649425;  // pi^{-1/4}
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        // Stroud-Secrest style initial guesses, then Newton on the
        // orthonormal Hermite recurrence (stable well past 100 nodes).
        if (i == 0) {
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * rule.nodes[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * rule.nodes[1];
        } else {
            z = 2.0 * z - rule.nodes[static_cast<std::size_t>(i - 2)];
        }
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = kPiQuarter;
            double p2 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            const double dz = p1 / pp;
            z -= dz;
            if (std::fabs(dz) <= 1e-15 * std::max(1.0, std::fabs(z))) break;
        }
        rule.nodes[static_cast<std::size_t>(i)] = z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -z;
        const double w = 2.0 / (pp * pp);
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    return rule;
}

QuadratureTable::QuadratureTable(const model::ExpEulerProblem& problem, int grid_points,
                                 int hermite_nodes, double half_width)
    : rule_(gauss_hermite(hermite_nodes)) {
    if (problem.d != 1) throw std::domain_error("quadrature table: requires d == 1");
    if (grid_points < 5) throw std::domain_error("quadrature table: grid too small");
    const double xi = problem.eval_point[0];
    x0_ = xi - half_width;
    dx_ = 2.0 * half_width / (grid_points - 1);
    points_ = grid_points;

    const int K = problem.grid.steps();
    values_.assign(static_cast<std::size_t>(K) + 1,
                   std::vector<double>(static_cast<std::size_t>(grid_points), 0.0));

    std::vector<double> point(1);
    for (int i = 0; i < grid_points; ++i) {
        point[0] = x0_ + dx_ * i;
        values_[0][static_cast<std::size_t>(i)] = problem.terminal(point);
    }

    const double inv_sqrt_pi = 0.5641895835477563;
    for (int k = 1; k <= K; ++k) {
        const double h = problem.grid.spacing(k - 1);
        const double sigma = std::sqrt(h) * std::sqrt(2.0);  // GH change of variables
        auto& cur = values_[static_cast<std::size_t>(k)];
        for (int i = 0; i < grid_points; ++i) {
            const double x = x0_ + dx_ * i;
            double lin = 0.0;
            double non = 0.0;
            for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
                const double a = value(k - 1, x + sigma * rule_.nodes[q]);
                lin += rule_.weights[q] * a;
                non += rule_.weights[q] * problem.f(a);
            }
            cur[static_cast<std::size_t>(i)] = inv_sqrt_pi * (lin + h * non);
        }
    }
}

double QuadratureTable::value(int k, double x) const {
    const auto& v = values_[static_cast<std::size_t>(k)];
    const double t = (x - x0_) / dx_;
    if (t <= 0.0) return v.front();  // clamped extrapolation
    if (t >= points_ - 1) return v.back();
    int i = static_cast<int>(t);
    i = std::clamp(i, 1, points_ - 3);
    const double s = t - i;
    // 4-point Lagrange cubic on the equally spaced neighbors.
    const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
    const double w0 = (s * s - 1.0) * (s - 2.0) / 2.0;
    const double w1 = -s * (s + 1.0) * (s - 2.0) / 2.0;
    const double w2 = s * (s * s - 1.0) / 6.0;
    return wm * v[static_cast<std::size_t>(i - 1)] + w0 * v[static_cast<std::size_t>(i)] +
           w1 * v[static_cast<std::size_t>(i + 1)] + w2 * v[static_cast<std::size_t>(i + 2)];
}

double QuadratureTable::mean(int k, double x0, double variance) const {
    if (variance <= 0.0) return value(k, x0);
    const double sigma = std::sqrt(2.0 * variance);
    const double inv_sqrt_pi = 0.5641895835477563;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
        acc += rule_.weights[q] * value(k, x0 + sigma * rule_.nodes[q]);
    }
    return inv_sqrt_pi * acc;
}

double QuadratureTable::second_moment(int k, double x0, double variance) const {
    if (variance <= 0.0) {
        const double v = value(k, x0);
        return v * v;
    }
    const double sigma = std::sqrt(2.0 * variance);
    const double inv_sqrt_pi = 0.5641895835477563;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule_.nodes.size(); ++q) {
        const double v = value(k, x0 + sigma * rule_.nodes[q]);
        acc += rule_.weights[q] * v * v;
    }
    return inv_sqrt_pi * acc;
}

QuadratureOracle quadrature_1d(const model::ExpEulerProblem& problem, int grid_points,
                               int hermite_nodes, double half_width) {
    if (problem.d != 1) throw std::domain_error("quadrature_1d: requires d == 1");
    const double R = half_width > 0.0 ? half_width : 6.0 * std::sqrt(problem.horizon());
    QuadratureTable fine(problem, grid_points, hermite_nodes, R);
    QuadratureTable coarse(problem, grid_points / 2 + 1, std::max(hermite_nodes / 2, 4), R);

    const int K = problem.grid.steps();
    const double xi = problem.eval_point[0];
    OracleResult at_eval;
    at_eval.method = OracleMethod::quadrature;
    at_eval.value = fine.value(K, xi);
    const double diff = std::fabs(at_eval.value - coarse.value(K, xi));
    at_eval.error_radius = 2.0 * diff + 1e-13 * (1.0 + std::fabs(at_eval.value));
    return QuadratureOracle{std::move(fine), at_eval};
}

double telescoping_check(const model::ExpEulerProblem& problem, const QuadratureTable& table,
                         int k, int l) {
    if (l > k) throw std::domain_error("telescoping_check: need l <= k");
    const double xi = problem.eval_point[0];
    const double lhs = table.value(k, xi);
    // X^{k,xi}_s is Gaussian around xi with variance t_k - t_s.
    double rhs = table.mean(l, xi, problem.grid.at(k) - problem.grid.at(l));
    const double inv_sqrt_pi = 0.5641895835477563;
    GaussHermiteRule rule = gauss_hermite(64);
    for (int s = l; s < k; ++s) {
        const double var = problem.grid.at(k) - problem.grid.at(s);  // > 0 since s < k
        const double h = problem.grid.spacing(s);
        const double sigma = std::sqrt(2.0 * var);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            acc += rule.weights[q] * problem.f(table.value(s, xi + sigma * rule.nodes[q]));
        }
        // f_s(x, a) - a = (t_{s+1} - t_s) f(a)
        rhs += h * inv_sqrt_pi * acc;
    }
    return std::fabs(lhs - rhs);
}

AprioriCheck apriori_bound_check(const model::ExpEulerProblem& problem,
                                 const QuadratureTable& table) {
    const int K = problem.grid.steps();
    const double xi = problem.eval_point[0];
    const double T = problem.horizon();

    AprioriCheck check;
    for (int k = 0; k <= K; ++k) {
        const double var = T - problem.grid.at(k);
        check.lhs_max = std::max(check.lhs_max, std::sqrt(table.second_moment(k, xi, var)));
    }
    double lipschitz_sum = 0.0;
    for (int l = 0; l < K; ++l) lipschitz_sum += problem.grid.spacing(l) * problem.lip_f;
    // |f_l(x, 0)| = (t_{l+1}-t_l) |f(0)|, independent of x.
    double f_part = 0.0;
    for (int l = 0; l < K; ++l) f_part += problem.grid.spacing(l) * std::fabs(problem.f_zero);
    const double g_part = std::sqrt(table.second_moment(0, xi, T));
    check.rhs = std::exp(lipschitz_sum) * (g_part + f_part);
    return check;
}

namespace {

struct NestedCtx {
    const model::ExpEulerProblem& problem;
    int m = 0;
};

// Depth-first plug-in estimator; draws come sequentially from the outer
// sample's stream so the slot order is fixed by construction.
double nested_rec(const NestedCtx& ctx, rng::RandomStream& stream, int r,
                  std::span<const double> x, std::vector<std::vector<double>>& scratch,
                  std::vector<double>& leaf_buf, std::vector<double>& leaf_vals) {
    const auto& p = ctx.problem;
    const auto d = static_cast<std::size_t>(p.d);
    if (r == 0) return p.terminal(x);

    const double h = p.grid.spacing(r - 1);
    const auto m = static_cast<std::size_t>(ctx.m);
    if (r == 1) {
        // Leaf level in bulk: draw all m steps at once, evaluate the
        // terminal in one batch. Slot order matches the per-leaf loop.
        leaf_buf.resize(m * d);
        stream.next_normals(leaf_buf, h);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < d; ++j) leaf_buf[i * d + j] += x[j];
        }
        leaf_vals.resize(m);
        if (p.terminal_batch) {
            p.terminal_batch(leaf_buf.data(), m, d, leaf_vals.data());
        } else {
            for (std::size_t i = 0; i < m; ++i) {
                leaf_vals[i] = p.terminal(
                    std::span<const double>(leaf_buf.data() + i * d, d));
            }
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = leaf_vals[i];
            acc += a + h * p.f(a);
        }
        return acc / static_cast<double>(m);
    }

    auto& y = scratch[static_cast<std::size_t>(r)];
    auto& z = scratch[static_cast<std::size_t>(r) + scratch.size() / 2];
    y.resize(d);
    z.resize(d);
    double acc = 0.0;
    for (int i = 0; i < ctx.m; ++i) {
        stream.next_normals(z, h);
        for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + z[j];
        const double a = nested_rec(ctx, stream, r - 1, y, scratch, leaf_buf, leaf_vals);
        acc += a + h * p.f(a);  // f_{r-1}(x, a) = a + (t_r - t_{r-1}) f(a)
    }
    return acc / static_cast<double>(ctx.m);
}

}  // namespace

OracleResult nested_mc(const model::ExpEulerProblem& problem, int k, std::span<const double> x,
                       int m_per_level, std::uint64_t seed, int parallel_width) {
    if (m_per_level < 2) throw std::domain_error("nested_mc: m_per_level must be >= 2");
    if (k < 0 || k > problem.grid.steps()) throw std::domain_error("nested_mc: k out of range");
    double predicted = 0.0;
    double m_pow = 1.0;
    for (int i = 1; i <= k; ++i) {
        m_pow *= m_per_level;
        predicted += m_pow;
    }
    predicted *= problem.d;
    if (k > 4) {
        throw BudgetError("nested_mc refusal: k > 4 costs ~" + std::to_string(predicted) +
                              " normal draws (m^k growth)",
                          predicted);
    }

    std::vector<double> point(x.begin(), x.end());
    if (point.empty()) point = problem.eval_point;

    OracleResult out;
    out.method = OracleMethod::nested_mc;
    if (k == 0) {
        out.value = problem.terminal(point);
        return out;
    }

    struct Part {
        double sum = 0.0;
        double sumsq = 0.0;
        CostLedger ledger;
    };
    NestedCtx ctx{problem, m_per_level};
    const double h_top = problem.grid.spacing(k - 1);
    const auto d = static_cast<std::size_t>(problem.d);

    auto parts = parallel_blocks<Part>(
        static_cast<std::size_t>(m_per_level), 8, parallel_width,
        [&](std::size_t begin, std::size_t end) {
            Part part;
            std::vector<std::vector<double>> scratch(2 * (static_cast<std::size_t>(k) + 1));
            std::vector<double> leaf_buf;
            std::vector<double> leaf_vals;
            std::vector<double> y(d);
            std::vector<double> z(d);
            for (std::size_t i = begin; i < end; ++i) {
                rng::RandomStream stream(rng::StreamKey{
                    seed, rng::MultiIndex{static_cast<std::int64_t>(i) + 1},
                    rng::Channel::brownian});
                stream.next_normals(z, h_top);
                for (std::size_t j = 0; j < d; ++j) y[j] = point[j] + z[j];
                const double a =
                    nested_rec(ctx, stream, k - 1, y, scratch, leaf_buf, leaf_vals);
                const double sample = a + h_top * problem.f(a);
                part.sum += sample;
                part.sumsq += sample * sample;
                part.ledger.merge(stream.ledger());
            }
            return part;
        });

    double sum = 0.0;
    double sumsq = 0.0;
    for (const auto& part : parts) {
        sum += part.sum;
        sumsq += part.sumsq;
        out.ledger.merge(part.ledger);
    }
    const auto m = static_cast<double>(m_per_level);
    out.value = sum / m;
    const double var = std::max(0.0, (sumsq - m * out.value * out.value) / (m - 1.0));
    out.error_radius = 2.5758293035489004 * std::sqrt(var / m);  // 99% two-sided
    return out;
}

}  // namespace mlpmc::oracles
