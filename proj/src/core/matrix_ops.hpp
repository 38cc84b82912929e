#pragma once

#include <Eigen/Dense>

namespace lqcpg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Loewner comparison of two symmetric matrices with an eigenvalue tolerance.
enum class LoewnerOrder { Geq, Leq, Equal, Incomparable };

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Max |M - M^T| entry, used to detect asymmetric inputs before symmetrizing.
double asymmetry(const Matrix& m);

double min_eigenvalue(const Matrix& sym);
double max_eigenvalue(const Matrix& sym);

// Symmetric PSD square root S with S * S^T = M.  Eigenvalues in
// [-tol, 0) are clamped to zero; below -tol the input is rejected.
// tol is relative to the largest |eigenvalue| with a 1e-12 floor.
Matrix psd_sqrt(const Matrix& m, double tol = 1e-10);

// Inverse of a symmetric matrix via eigendecomposition.  Eigenvalues with
// |lambda| <= floor are treated as singular: either an error (default) or,
// with pseudo = true, dropped (Moore-Penrose).
Matrix sym_inverse(const Matrix& m, double floor = 1e-10, bool pseudo = false);

LoewnerOrder loewner_compare(const Matrix& a, const Matrix& b, double tol);

// sqrt(sum_i dt_i |M_i|_F^2) over per-interval values; the L2(0,T) norm of a
// piecewise constant matrix function.
double piecewise_l2_norm(const std::vector<Matrix>& values, const std::vector<double>& dt);

}  // namespace lqcpg
