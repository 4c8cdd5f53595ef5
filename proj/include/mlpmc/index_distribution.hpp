#pragma once

#include <vector>

#include "mlpmc/time_grid.hpp"

namespace mlpmc::model {

// Law of the random time level R_k over {0,...,k-1} plus the importance
// weights p_{k,l}, tied together by p_{k,l} P_k(l) = P_k(l)^2. Where an atom
// has zero probability the weight is 1: the branch is never sampled, and the
// coupling hypothesis forces the matching Lipschitz constant to zero.
class IndexDistribution {
public:
    IndexDistribution(std::vector<std::vector<double>> pmf,
                      std::vector<std::vector<double>> weights);

    [[nodiscard]] int levels() const { return static_cast<int>(pmf_.size()); }
    [[nodiscard]] double prob(int k, int l) const {
        return pmf_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(l)];
    }
    [[nodiscard]] double weight(int k, int l) const {
        return weights_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(l)];
    }

private:
    // Row k-1 holds P_k(l) for l in {0,...,k-1}, k = 1..K.
    std::vector<std::vector<double>> pmf_;
    std::vector<std::vector<double>> weights_;
};

// P_k(l) = (t_{l+1} - t_l) / t_k, the law of max{n : t_n <= t_k U}.
IndexDistribution make_grid_index_distribution(const TimeGrid& grid);

// max{n : t_n <= t_k u}; always < k. Throws for k == 0.
int sample_index(const TimeGrid& grid, int k, double u);

}  // namespace mlpmc::model
