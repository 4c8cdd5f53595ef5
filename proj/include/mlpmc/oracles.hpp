#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlpmc/cost_ledger.hpp"
#include "mlpmc/errors.hpp"
#include "mlpmc/problem.hpp"

namespace mlpmc::oracles {

enum class OracleMethod { closed_form, quadrature, nested_mc };

struct OracleResult {
    double value = 0.0;
    OracleMethod method = OracleMethod::closed_form;
    // 0 for closed form; discretization estimate for quadrature; 99% CI
    // half-width for nested Monte Carlo.
    double error_radius = 0.0;
    CostLedger ledger;
};

// Exact solution of the affine exponential-Euler recursion
// v_k = rho v_{k-1} + beta T/K with rho = 1 + alpha T/K and v_0 = c0.
OracleResult exact_affine(int K, double T, double alpha, double beta, double c0);

// ---- deterministic 1-d quadrature ------------------------------------------

struct GaussHermiteRule {
    std::vector<double> nodes;    // roots of H_Q
    std::vector<double> weights;  // sum(weights) = sqrt(pi)
};

GaussHermiteRule gauss_hermite(int points);

// Tabulation of every v_k on a uniform x-grid around the eval point; each
// step's expectation is computed by Gauss-Hermite quadrature over the cubic
// interpolant of the previous table (clamped outside the grid).
class QuadratureTable {
public:
    QuadratureTable(const model::ExpEulerProblem& problem, int grid_points, int hermite_nodes,
                    double half_width);

    [[nodiscard]] double value(int k, double x) const;
    [[nodiscard]] int levels() const { return static_cast<int>(values_.size()) - 1; }

    // E[ h(v_k(x0 + sigma Z)) ] for h(a) = a or a^2, by the same rule.
    [[nodiscard]] double mean(int k, double x0, double variance) const;
    [[nodiscard]] double second_moment(int k, double x0, double variance) const;

private:
    double x0_;
    double dx_;
    int points_;
    GaussHermiteRule rule_;
    std::vector<std::vector<double>> values_;
};

struct QuadratureOracle {
    QuadratureTable table;
    OracleResult at_eval;  // v_K(xi) with a Richardson error radius
};

// Requires d == 1. half_width <= 0 selects the default 6 sqrt(T): Gaussian
// mass outside is below every oracle tolerance used here.
QuadratureOracle quadrature_1d(const model::ExpEulerProblem& problem, int grid_points = 2001,
                               int hermite_nodes = 64, double half_width = 0.0);

// Both sides of the telescoping identity
//   v_k(xi) = E[v_l(X_l)] + sum_{s=l}^{k-1} E[f_s(X_s, v_s(X_s)) - v_s(X_s)]
// evaluated by quadrature; returns |lhs - rhs|.
double telescoping_check(const model::ExpEulerProblem& problem, const QuadratureTable& table,
                         int k, int l);

struct AprioriCheck {
    double lhs_max = 0.0;  // max_k (E|v_k(X^{K,xi}_k)|^2)^{1/2}
    double rhs = 0.0;      // exp(sum L_l) [ (E|g|^2)^{1/2} + sum (E|f_l(.,0)|^2)^{1/2} ]
    [[nodiscard]] bool ok() const { return lhs_max <= rhs * (1.0 + 1e-9); }
};

AprioriCheck apriori_bound_check(const model::ExpEulerProblem& problem,
                                 const QuadratureTable& table);

// ---- brute-force nested Monte Carlo ----------------------------------------

// Plug-in recursive estimator: every level averages m_per_level fresh
// samples, so the ledger grows like m^k — the exponential baseline the MLP
// scheme is measured against. k > 4 is refused with the predicted cost.
OracleResult nested_mc(const model::ExpEulerProblem& problem, int k, std::span<const double> x,
                       int m_per_level, std::uint64_t seed, int parallel_width = 1);

}  // namespace mlpmc::oracles
