#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "mlpmc/time_grid.hpp"

namespace mlpmc::model {

using ScalarFn = std::function<double(double)>;
using TerminalFn = std::function<double(std::span<const double>)>;
// Bulk terminal evaluation for oracle hot loops: n points, each dim wide,
// stored consecutively.
using TerminalBatchFn = std::function<void(const double*, std::size_t, std::size_t, double*)>;

// One nested-expectation problem in the general one-step form: backward
// dynamics phi_k, per-step nonlinearities f_k(x, a), terminal g, declared
// Lipschitz data, and the cost-model exponents (alpha, gamma, p). All
// callables must be pure; the spec is immutable after construction and may
// be shared across threads.
struct ProblemSpec {
    int d = 1;
    TimeGrid grid;
    // Scalar standard normals one dynamics step consumes; makes the draw
    // count of a path a declared, checkable quantity.
    int step_normals = 0;
    // out = phi_k(x, z) with z holding step_normals standard normals; any
    // variance scaling happens inside.
    std::function<void(int, std::span<const double>, std::span<const double>, std::span<double>)>
        dynamics;
    std::function<double(int, std::span<const double>, double)> nonlinearity;  // f_k(x, a)
    TerminalFn terminal;                                                       // g
    std::vector<double> lipschitz;  // L_k bounding |(f_k(x,a)-a)-(f_k(x,b)-b)| / |a-b|
    std::vector<double> eval_point;
    double cost_alpha = 0.0;
    double cost_gamma = 1.0;
    double cost_p = 1.0;
};

// The exponential-Euler family: v_k(x) = E[ v_{k-1}(x+W) + dt f(v_{k-1}(x+W)) ]
// with additive Gaussian one-step noise. Both the fast estimator path and
// the 1-d oracles consume this structured form directly.
struct ExpEulerProblem {
    int d = 1;
    TimeGrid grid;
    ScalarFn f;
    double lip_f = 0.0;
    double f_zero = 0.0;  // f(0)
    TerminalFn terminal;
    TerminalBatchFn terminal_batch;
    std::vector<double> eval_point;
    // (E |v0(xi + W_T)|^2)^{1/2}, the terminal part of the moment bracket in
    // the error bounds. Registry problems carry the closed form; NaN means
    // the caller must supply it.
    double kappa_v0 = std::numeric_limits<double>::quiet_NaN();
    std::string id = "exp_euler";

    [[nodiscard]] int steps() const { return grid.steps(); }
    [[nodiscard]] double horizon() const { return grid.horizon(); }
    // Coupling constant c with L_l <= c P_k(l) under the grid index law.
    [[nodiscard]] double coupling() const { return lip_f * grid.horizon(); }
};

ExpEulerProblem make_exp_euler(int d, int K, double T, ScalarFn f, double lip_f, TerminalFn v0,
                               std::vector<double> eval_point = {});

// General-form wrapping: phi_k(x,w) = x + w with per-coordinate variance
// t_{k+1}-t_k, f_k(x,a) = a + (t_{k+1}-t_k) f(a), g = v0,
// L_k = (t_{k+1}-t_k) lip_f, cost exponents (alpha,gamma,p) = (0,1,1).
ProblemSpec make_exp_euler_problem(const ExpEulerProblem& problem);

// ---- registry -------------------------------------------------------------

struct NonlinearitySpec {
    std::string kind = "zero";  // zero | constant | affine | sin | scaled_cos
    double alpha = 0.0;         // affine: f(a) = alpha a + beta
    double beta = 0.0;          // affine offset; also the constant value
    double scale = 1.0;         // sin / scaled_cos amplitude
};

struct TerminalSpec {
    std::string kind = "constant";  // constant | quadratic | gaussian_bump
    double value = 1.0;             // constant terminal value
};

struct RegistryNonlinearity {
    ScalarFn f;
    double lip = 0.0;
    double at_zero = 0.0;
};

RegistryNonlinearity make_nonlinearity(const NonlinearitySpec& spec);
TerminalFn make_terminal(const TerminalSpec& spec);
TerminalBatchFn make_terminal_batch(const TerminalSpec& spec);

ExpEulerProblem make_registry_problem(int d, int K, double T, const NonlinearitySpec& nl,
                                      const TerminalSpec& term,
                                      std::vector<double> eval_point = {});

// ---- Lipschitz validation ---------------------------------------------------

struct LipschitzViolation {
    int step = 0;
    double a = 0.0;
    double b = 0.0;
    double observed = 0.0;
    double allowed = 0.0;
};

struct LipschitzReport {
    int probes = 0;
    std::vector<LipschitzViolation> violations;
    [[nodiscard]] bool ok() const { return violations.empty(); }
};

// Randomized spot-check of the declared moduli: samples (x, a, b) and asserts
// |(f_k(x,a)-a) - (f_k(x,b)-b)| <= L_k |a-b| with slack 1e-9 |a-b|.
// Violations are reported, not thrown.
LipschitzReport validate_lipschitz(const ProblemSpec& spec, int probes, std::uint64_t seed);

}  // namespace mlpmc::model
