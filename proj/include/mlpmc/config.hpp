#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlpmc/problem.hpp"

namespace mlpmc::cli {

// One experiment, fully determined by the config file plus explicit
// overrides: every CSV row must be re-derivable from it. Unknown keys are
// errors; the seed is never taken from the clock.
struct ExperimentConfig {
    int version = 1;
    std::string mode;  // estimate | validate | converge | complexity | oracle

    // problem
    std::string problem_kind = "exp_euler";
    int d = 1;
    int K = 10;
    double T = 1.0;
    model::NonlinearitySpec nonlinearity;
    model::TerminalSpec terminal;
    std::vector<double> eval_point;  // empty -> origin

    // estimator grid
    std::vector<int> m_list = {2};
    std::vector<int> n_list = {2};
    int runs = 1;
    std::uint64_t seed = 20240801;  // fixed documented default, never wall clock
    std::uint64_t max_samples = std::uint64_t{1} << 40;
    int threads = 0;  // 0 -> hardware

    // oracle / validation
    int quadrature_points = 2001;
    int hermite_nodes = 64;
    int nested_m = 2000;

    // complexity
    std::vector<double> eps_list = {0.5, 0.25, 0.125};
    std::vector<int> d_list = {1, 10, 100};
    double delta = 0.5;

    std::string out_path;  // empty -> stdout

    [[nodiscard]] model::ExpEulerProblem build_problem() const;
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace mlpmc::cli
