// linalg.hpp — thin wrappers over the dense kernels the tensor code leans on.

#pragma once

#include <Eigen/Dense>

#include <complex>

namespace dickeband::linalg {

struct SvdResult {
    Eigen::MatrixXcd u;       // m x k
    Eigen::VectorXd s;        // k, descending
    Eigen::MatrixXcd vh;      // k x n
};

// Thin (economy) SVD. Uses LAPACK zgesdd when available, with zgesvd and
// Eigen fallbacks on convergence failure.
SvdResult svd_econ(const Eigen::MatrixXcd& a);

// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
void hermitian_eig(const Eigen::MatrixXcd& a, Eigen::VectorXd& eigenvalues,
                   Eigen::MatrixXcd& eigenvectors);

struct QrResult {
    Eigen::MatrixXcd q;  // m x k isometry
    Eigen::MatrixXcd r;  // k x n upper triangular
};
QrResult qr_thin(const Eigen::MatrixXcd& a);

struct LqResult {
    Eigen::MatrixXcd l;  // m x k lower triangular
    Eigen::MatrixXcd q;  // k x n co-isometry (q q^dagger = I)
};
LqResult lq_thin(const Eigen::MatrixXcd& a);

struct TruncationDecision {
    int kept{0};
    double discarded_abs{0.0};  // sum of squared dropped singular values
    double discarded_rel{0.0};  // relative to the total squared sum
};

// Smallest rank whose discarded squared weight stays within cutoff_rel of the
// total, additionally capped at chi_max; always keeps at least one value.
TruncationDecision decide_truncation(const Eigen::VectorXd& s, int chi_max,
                                     double cutoff_rel);

}  // namespace dickeband::linalg
