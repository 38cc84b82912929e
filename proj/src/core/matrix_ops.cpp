#include "matrix_ops.hpp"

#include <cmath>
#include <vector>

#include "errors.hpp"

namespace lqcpg {

double asymmetry(const Matrix& m) {
    return (m - m.transpose()).cwiseAbs().maxCoeff();
}

double min_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& sym) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

Matrix psd_sqrt(const Matrix& m, double tol) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    Vector ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-12);
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev[i] < -tol * scale) throw numerical_error("psd_sqrt: matrix is not PSD");
        ev[i] = std::sqrt(std::max(ev[i], 0.0));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix sym_inverse(const Matrix& m, double floor, bool pseudo) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
    Vector ev = es.eigenvalues();
    Vector inv(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev[i]) <= floor) {
            if (!pseudo) throw numerical_error("sym_inverse: matrix is singular to working tolerance");
            inv[i] = 0.0;
        } else {
            inv[i] = 1.0 / ev[i];
        }
    }
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

LoewnerOrder loewner_compare(const Matrix& a, const Matrix& b, double tol) {
    const Matrix diff = symmetrize(a - b);
    const bool geq = min_eigenvalue(diff) >= -tol;
    const bool leq = min_eigenvalue(-diff) >= -tol;
    if (geq && leq) return LoewnerOrder::Equal;
    if (geq) return LoewnerOrder::Geq;
    if (leq) return LoewnerOrder::Leq;
    return LoewnerOrder::Incomparable;
}

double piecewise_l2_norm(const std::vector<Matrix>& values, const std::vector<double>& dt) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += dt[i] * values[i].squaredNorm();
    return std::sqrt(acc);
}

}  // namespace lqcpg
