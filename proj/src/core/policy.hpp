#pragma once

#include <functional>
#include <vector>

#include "matrix_ops.hpp"
#include "time_grid.hpp"

namespace lqcpg {

// Gaussian feedback policy theta = (K, V), piecewise constant on a grid:
// actions on [t_i, t_{i+1}) are drawn from N(K_i x, V_i).  V values are
// symmetrized on construction.  theta_epsilon() records the smallest V
// eigenvalue; it is positive iff the policy lies in the admissible class.
// Construction does not reject indefinite V so that oversized gradient
// steps can be represented and flagged by the caller.
class Policy {
  public:
    Policy(TimeGrid grid, std::vector<Matrix> K, std::vector<Matrix> V);

    const TimeGrid& grid() const { return grid_; }
    int num_intervals() const { return grid_.num_intervals(); }
    const std::vector<Matrix>& K() const { return K_; }
    const std::vector<Matrix>& V() const { return V_; }
    const Matrix& K(int i) const { return K_[static_cast<std::size_t>(i)]; }
    const Matrix& V(int i) const { return V_[static_cast<std::size_t>(i)]; }
    const Matrix& K_at(double t) const { return K_[static_cast<std::size_t>(grid_.interval_of(t))]; }
    const Matrix& V_at(double t) const { return V_[static_cast<std::size_t>(grid_.interval_of(t))]; }

    double theta_epsilon() const { return theta_epsilon_; }
    bool in_theta() const { return theta_epsilon_ > 0.0; }

    double min_eig_V() const { return theta_epsilon_; }
    double max_eig_V() const;
    double l2_norm_K() const;

    // Same (K, V) values everywhere.
    static Policy constant(const TimeGrid& grid, const Matrix& K, const Matrix& V);

  private:
    TimeGrid grid_;
    std::vector<Matrix> K_;
    std::vector<Matrix> V_;
    double theta_epsilon_ = 0.0;
};

enum class ProjectionMode {
    IntervalAverage,  // L2-orthogonal projection: interval averages
    LeftSample,       // left-endpoint sampling
};

// Project a piecewise-constant policy onto another grid.  K always uses
// interval averages; V uses interval averages or left-endpoint sampling
// according to v_mode.
Policy project_policy_to_grid(const Policy& theta, const TimeGrid& target,
                              ProjectionMode v_mode = ProjectionMode::IntervalAverage);

// Same, for general time-dependent (K, V) given as callables.  Interval
// averages are computed with a composite midpoint rule (quad_points per
// target interval).
Policy project_policy_to_grid(const std::function<Matrix(double)>& K_fn,
                              const std::function<Matrix(double)>& V_fn, const TimeGrid& target,
                              ProjectionMode v_mode = ProjectionMode::IntervalAverage,
                              int quad_points = 64);

}  // namespace lqcpg
