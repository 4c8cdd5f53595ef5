#include "mlpmc/time_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace mlpmc::model {

TimeGrid::TimeGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::domain_error("time grid: needs at least two points");
    if (points_.front() != 0.0) throw std::domain_error("time grid: must start at 0");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1])) {
            throw std::domain_error("time grid: points must be strictly increasing");
        }
    }
}

TimeGrid TimeGrid::uniform(int steps, double horizon) {
    if (steps < 1) throw std::domain_error("time grid: step count must be positive");
    if (!(horizon > 0.0)) throw std::domain_error("time grid: horizon must be positive");
    std::vector<double> pts(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        pts[static_cast<std::size_t>(k)] = horizon * static_cast<double>(k) / steps;
    }
    pts.back() = horizon;
    return TimeGrid(std::move(pts));
}

int TimeGrid::last_index_at_or_before(double s) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), s);
    return static_cast<int>(it - points_.begin()) - 1;
}

}  // namespace mlpmc::model
