#include "model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "errors.hpp"

namespace lqcpg {

namespace {

void require_shape(const Matrix& m, int rows, int cols, const std::string& name) {
    if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream os;
        os << name << " has shape " << m.rows() << "x" << m.cols() << ", expected " << rows << "x" << cols;
        throw std::invalid_argument(os.str());
    }
}

}  // namespace

Matrix LqcModel::action_hessian(double t, const Matrix& P) const {
    Matrix m = R(t) + rho * vbar_inverse(t);
    for (int j = 0; j < noise_channels; ++j) {
        const Matrix Dj = D[static_cast<std::size_t>(j)](t);
        m += Dj.transpose() * P * Dj;
    }
    return symmetrize(m);
}

Matrix LqcModel::action_linear(double t, const Matrix& P) const {
    Matrix l = B(t).transpose() * P + S(t);
    for (int j = 0; j < noise_channels; ++j) {
        l += D[static_cast<std::size_t>(j)](t).transpose() * P * C[static_cast<std::size_t>(j)](t);
    }
    return l;
}

Matrix LqcModel::vbar_inverse(double t) const {
    return sym_inverse(Vbar(t));
}

ValidationReport validate_model(const LqcModel& model, const TimeGrid& grid) {
    const int d = model.state_dim, k = model.action_dim, p = model.noise_channels;
    if (d < 1 || k < 1 || p < 1) throw std::invalid_argument("validate_model: dimensions must be positive");
    if (model.horizon <= 0.0) throw std::invalid_argument("validate_model: horizon must be positive");
    if (static_cast<int>(model.C.size()) != p || static_cast<int>(model.D.size()) != p) {
        throw std::invalid_argument("validate_model: need one C and one D coefficient per noise channel");
    }

    ValidationReport report;
    const double sym_tol = 1e-8;

    require_shape(model.G, d, d, "G");
    require_shape(model.Sigma0, d, d, "Sigma0");

    if (asymmetry(model.G) > sym_tol) report.warnings.push_back("G symmetrized (asymmetry above 1e-8)");
    if (asymmetry(model.Sigma0) > sym_tol) report.warnings.push_back("Sigma0 symmetrized (asymmetry above 1e-8)");
    if (min_eigenvalue(symmetrize(model.Sigma0)) < -1e-10) {
        report.violations.push_back("Sigma0 must be positive semidefinite");
    }

    if (model.rho <= 0.0) report.violations.push_back("rho must be positive");

    double vbar_min = std::numeric_limits<double>::infinity();
    bool q_warned = false, r_warned = false, vbar_warned = false;
    for (double t : grid.nodes()) {
        require_shape(model.A(t), d, d, "A(t)");
        require_shape(model.B(t), d, k, "B(t)");
        for (int j = 0; j < p; ++j) {
            require_shape(model.C[static_cast<std::size_t>(j)](t), d, d, "C_j(t)");
            require_shape(model.D[static_cast<std::size_t>(j)](t), d, k, "D_j(t)");
        }
        const Matrix q = model.Q(t), r = model.R(t), vb = model.Vbar(t);
        require_shape(q, d, d, "Q(t)");
        require_shape(model.S(t), k, d, "S(t)");
        require_shape(r, k, k, "R(t)");
        require_shape(vb, k, k, "Vbar(t)");
        if (!q_warned && asymmetry(q) > sym_tol) {
            report.warnings.push_back("Q symmetrized (asymmetry above 1e-8)");
            q_warned = true;
        }
        if (!r_warned && asymmetry(r) > sym_tol) {
            report.warnings.push_back("R symmetrized (asymmetry above 1e-8)");
            r_warned = true;
        }
        if (!vbar_warned && asymmetry(vb) > sym_tol) {
            report.warnings.push_back("Vbar symmetrized (asymmetry above 1e-8)");
            vbar_warned = true;
        }
        vbar_min = std::min(vbar_min, min_eigenvalue(symmetrize(vb)));
    }
    if (vbar_min <= 0.0) report.violations.push_back("Vbar not uniformly positive definite");

    report.ok = report.violations.empty();
    return report;
}

double relative_entropy_gaussian(const Matrix& K, const Matrix& V, const Matrix& Vbar,
                                 const Matrix& second_moment) {
    const auto k = V.rows();
    if (V.cols() != k || Vbar.rows() != k || Vbar.cols() != k) {
        throw std::invalid_argument("relative_entropy_gaussian: V and Vbar must be square of equal size");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es_v(symmetrize(V));
    Eigen::SelfAdjointEigenSolver<Matrix> es_vb(symmetrize(Vbar));
    if (es_v.eigenvalues().minCoeff() <= 0.0) throw numerical_error("relative_entropy_gaussian: V must be PD");
    if (es_vb.eigenvalues().minCoeff() <= 0.0) throw numerical_error("relative_entropy_gaussian: Vbar must be PD");

    const Matrix vbar_inv = sym_inverse(Vbar);
    const double trace_mean = (K.transpose() * vbar_inv * K * second_moment).trace();
    const double trace_cov = (vbar_inv * V).trace();
    const double log_det = es_vb.eigenvalues().array().log().sum() - es_v.eigenvalues().array().log().sum();
    return 0.5 * (trace_mean + trace_cov - static_cast<double>(k) + log_det);
}

}  // namespace lqcpg
