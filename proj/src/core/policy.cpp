#include "policy.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace lqcpg {

Policy::Policy(TimeGrid grid, std::vector<Matrix> K, std::vector<Matrix> V)
    : grid_(std::move(grid)), K_(std::move(K)), V_(std::move(V)) {
    const auto n = static_cast<std::size_t>(grid_.num_intervals());
    if (K_.size() != n || V_.size() != n) {
        throw std::invalid_argument("Policy: need one K and one V value per grid interval");
    }
    theta_epsilon_ = std::numeric_limits<double>::infinity();
    for (auto& v : V_) {
        if (v.rows() != v.cols()) throw std::invalid_argument("Policy: V values must be square");
        v = symmetrize(v);
        theta_epsilon_ = std::min(theta_epsilon_, min_eigenvalue(v));
    }
    for (const auto& k : K_) {
        if (k.rows() != V_.front().rows()) throw std::invalid_argument("Policy: K rows must match V dimension");
    }
}

double Policy::max_eig_V() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& v : V_) m = std::max(m, max_eigenvalue(v));
    return m;
}

double Policy::l2_norm_K() const {
    std::vector<double> dt(static_cast<std::size_t>(grid_.num_intervals()));
    for (int i = 0; i < grid_.num_intervals(); ++i) dt[static_cast<std::size_t>(i)] = grid_.dt(i);
    return piecewise_l2_norm(K_, dt);
}

Policy Policy::constant(const TimeGrid& grid, const Matrix& K, const Matrix& V) {
    const auto n = static_cast<std::size_t>(grid.num_intervals());
    return Policy(grid, std::vector<Matrix>(n, K), std::vector<Matrix>(n, V));
}

namespace {

// Average of a piecewise-constant function (values on src intervals) over
// [a, b], by exact interval overlap.
Matrix overlap_average(const TimeGrid& src, const std::vector<Matrix>& values, double a, double b) {
    Matrix acc = Matrix::Zero(values.front().rows(), values.front().cols());
    const int first = src.interval_of(a);
    for (int i = first; i < src.num_intervals(); ++i) {
        const double lo = std::max(a, src.node(i));
        const double hi = std::min(b, src.node(i + 1));
        if (hi <= lo) {
            if (src.node(i) >= b) break;
            continue;
        }
        acc += (hi - lo) * values[static_cast<std::size_t>(i)];
    }
    return acc / (b - a);
}

}  // namespace

Policy project_policy_to_grid(const Policy& theta, const TimeGrid& target, ProjectionMode v_mode) {
    std::vector<Matrix> K, V;
    K.reserve(static_cast<std::size_t>(target.num_intervals()));
    V.reserve(static_cast<std::size_t>(target.num_intervals()));
    for (int i = 0; i < target.num_intervals(); ++i) {
        const double a = target.node(i), b = target.node(i + 1);
        K.push_back(overlap_average(theta.grid(), theta.K(), a, b));
        V.push_back(v_mode == ProjectionMode::IntervalAverage ? overlap_average(theta.grid(), theta.V(), a, b)
                                                              : theta.V_at(a));
    }
    return Policy(target, std::move(K), std::move(V));
}

Policy project_policy_to_grid(const std::function<Matrix(double)>& K_fn,
                              const std::function<Matrix(double)>& V_fn, const TimeGrid& target,
                              ProjectionMode v_mode, int quad_points) {
    std::vector<Matrix> K, V;
    for (int i = 0; i < target.num_intervals(); ++i) {
        const double a = target.node(i), h = target.dt(i);
        Matrix accK = K_fn(a + h / (2.0 * quad_points));
        for (int q = 1; q < quad_points; ++q) accK += K_fn(a + h * (q + 0.5) / quad_points);
        K.push_back(accK / quad_points);
        if (v_mode == ProjectionMode::LeftSample) {
            V.push_back(V_fn(a));
        } else {
            Matrix accV = V_fn(a + h / (2.0 * quad_points));
            for (int q = 1; q < quad_points; ++q) accV += V_fn(a + h * (q + 0.5) / quad_points);
            V.push_back(accV / quad_points);
        }
    }
    return Policy(target, std::move(K), std::move(V));
}

}  // namespace lqcpg
