#include "time_grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace lqcpg {

TimeGrid::TimeGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.size() < 2) throw std::invalid_argument("TimeGrid: need at least two nodes");
    if (nodes_.front() != 0.0) throw std::invalid_argument("TimeGrid: first node must be 0");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        if (!(nodes_[i + 1] > nodes_[i])) throw std::invalid_argument("TimeGrid: nodes must be strictly increasing");
    }
}

TimeGrid TimeGrid::uniform(double horizon, int num_intervals) {
    if (horizon <= 0.0) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (num_intervals < 1) throw std::invalid_argument("TimeGrid: need at least one interval");
    std::vector<double> nodes(static_cast<std::size_t>(num_intervals) + 1);
    for (int i = 0; i <= num_intervals; ++i) nodes[static_cast<std::size_t>(i)] = horizon * i / num_intervals;
    nodes.back() = horizon;
    return TimeGrid(std::move(nodes));
}

double TimeGrid::mesh() const {
    double m = 0.0;
    for (int i = 0; i < num_intervals(); ++i) m = std::max(m, dt(i));
    return m;
}

int TimeGrid::interval_of(double t) const {
    if (t >= nodes_.back()) return num_intervals() - 1;
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    int idx = static_cast<int>(it - nodes_.begin()) - 1;
    return std::max(idx, 0);
}

TimeGrid TimeGrid::refined(int factor) const {
    if (factor < 1) throw std::invalid_argument("TimeGrid: refinement factor must be >= 1");
    if (factor == 1) return *this;
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(num_intervals()) * factor + 1);
    out.push_back(nodes_.front());
    for (int i = 0; i < num_intervals(); ++i) {
        for (int s = 1; s <= factor; ++s) {
            out.push_back(s == factor ? nodes_[static_cast<std::size_t>(i) + 1]
                                      : nodes_[static_cast<std::size_t>(i)] + dt(i) * s / factor);
        }
    }
    return TimeGrid(std::move(out));
}

}  // namespace lqcpg
