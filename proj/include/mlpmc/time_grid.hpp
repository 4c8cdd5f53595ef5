#pragma once

#include <vector>

namespace mlpmc::model {

// Strictly increasing time points 0 = t_0 < t_1 < ... < t_K = T.
class TimeGrid {
public:
    TimeGrid() : points_{0.0, 1.0} {}
    explicit TimeGrid(std::vector<double> points);

    static TimeGrid uniform(int steps, double horizon);

    [[nodiscard]] int steps() const { return static_cast<int>(points_.size()) - 1; }
    [[nodiscard]] double horizon() const { return points_.back(); }
    [[nodiscard]] double at(int k) const { return points_[static_cast<std::size_t>(k)]; }
    [[nodiscard]] double spacing(int k) const { return at(k + 1) - at(k); }
    [[nodiscard]] const std::vector<double>& points() const { return points_; }

    // max{n : t_n <= s}; s must be >= 0.
    [[nodiscard]] int last_index_at_or_before(double s) const;

private:
    std::vector<double> points_;
};

}  // namespace mlpmc::model
