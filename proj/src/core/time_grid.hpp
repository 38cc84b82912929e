#pragma once

#include <vector>

namespace lqcpg {

// Partition 0 = t_0 < ... < t_N = T of the horizon.  Policies are constant
// on the half-open intervals [t_i, t_{i+1}).
class TimeGrid {
  public:
    explicit TimeGrid(std::vector<double> nodes);
    static TimeGrid uniform(double horizon, int num_intervals);

    const std::vector<double>& nodes() const { return nodes_; }
    int num_intervals() const { return static_cast<int>(nodes_.size()) - 1; }
    double node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    double dt(int i) const { return nodes_[static_cast<std::size_t>(i) + 1] - nodes_[static_cast<std::size_t>(i)]; }
    double horizon() const { return nodes_.back(); }
    double mesh() const;

    // Index i with t in [t_i, t_{i+1}); t = T maps to the last interval.
    int interval_of(double t) const;

    // Each interval split into `factor` equal sub-intervals.
    TimeGrid refined(int factor) const;

    bool operator==(const TimeGrid& other) const { return nodes_ == other.nodes_; }

  private:
    std::vector<double> nodes_;
};

}  // namespace lqcpg
