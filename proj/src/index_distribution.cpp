#include "mlpmc/index_distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace mlpmc::model {

IndexDistribution::IndexDistribution(std::vector<std::vector<double>> pmf,
                                     std::vector<std::vector<double>> weights)
    : pmf_(std::move(pmf)), weights_(std::move(weights)) {
    if (pmf_.size() != weights_.size()) {
        throw std::invalid_argument("index distribution: pmf/weight shape mismatch");
    }
    for (std::size_t row = 0; row < pmf_.size(); ++row) {
        const auto k = row + 1;
        if (pmf_[row].size() != k || weights_[row].size() != k) {
            throw std::invalid_argument("index distribution: row k must have k atoms");
        }
        double sum = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            const double p = pmf_[row][l];
            const double w = weights_[row][l];
            if (p < 0.0 || !(w > 0.0)) {
                throw std::invalid_argument("index distribution: invalid atom");
            }
            // p_{k,l} P = P^2 exactly on the support.
            if (p > 0.0 && w * p != p * p) {
                throw std::invalid_argument("index distribution: weight condition violated");
            }
            sum += p;
        }
        if (std::fabs(sum - 1.0) > 1e-12) {
            throw std::invalid_argument("index distribution: pmf does not sum to 1");
        }
    }
}

IndexDistribution make_grid_index_distribution(const TimeGrid& grid) {
    const int K = grid.steps();
    std::vector<std::vector<double>> pmf(static_cast<std::size_t>(K));
    std::vector<std::vector<double>> weights(static_cast<std::size_t>(K));
    for (int k = 1; k <= K; ++k) {
        auto& p = pmf[static_cast<std::size_t>(k - 1)];
        auto& w = weights[static_cast<std::size_t>(k - 1)];
        p.resize(static_cast<std::size_t>(k));
        w.resize(static_cast<std::size_t>(k));
        double sum = 0.0;
        for (int l = 0; l < k; ++l) {
            const double atom = grid.spacing(l) / grid.at(k);
            p[static_cast<std::size_t>(l)] = atom;
            w[static_cast<std::size_t>(l)] = atom > 0.0 ? atom : 1.0;
            sum += atom;
        }
        // Spacings telescope to t_k; renormalize the float dust so the
        // constructor's 1e-12 check is about the model, not about rounding.
        if (sum != 1.0 && sum > 0.0) {
            for (auto& atom : p) atom /= sum;
            for (int l = 0; l < k; ++l) {
                w[static_cast<std::size_t>(l)] = p[static_cast<std::size_t>(l)] > 0.0
                                                     ? p[static_cast<std::size_t>(l)]
                                                     : 1.0;
            }
        }
    }
    return IndexDistribution(std::move(pmf), std::move(weights));
}

int sample_index(const TimeGrid& grid, int k, double u) {
    if (k < 1 || k > grid.steps()) throw std::domain_error("sample_index: k out of range");
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("sample_index: u outside (0,1)");
    const int l = grid.last_index_at_or_before(grid.at(k) * u);
    return l < k ? l : k - 1;
}

}  // namespace mlpmc::model
