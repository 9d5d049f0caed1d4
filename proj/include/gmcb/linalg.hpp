#pragma once

#include <Eigen/Dense>

namespace gmcb::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Per-thread record of the largest Cholesky factorization performed. The
// large-n design point promises no factorization bigger than q x q, so the
// samplers route every factorization through chol() and the bench asserts on
// this counter.
struct CholStats {
    int max_dim = 0;
    long long count = 0;
};

CholStats& chol_stats();
void reset_chol_stats();

// Symmetry check with 1e-10 relative tolerance, then (Q + Q^T)/2.
// Throws NumericError if Q is materially asymmetric.
MatrixXd symmetrize_checked(const MatrixXd& q, double rel_tol = 1e-10);

// Lower Cholesky factor of a symmetric positive definite matrix.
// Throws NotPositiveDefiniteError carrying the failing pivot index.
MatrixXd chol(const MatrixXd& spd);

double logdet_from_chol(const MatrixXd& lower);

// Kronecker product A (x) B, column-major vec convention.
MatrixXd kron(const MatrixXd& a, const MatrixXd& b);

// Sequential-regression factorization of a covariance matrix:
// given Sigma (q x q SPD), return delta_j = Sigma_{1:j-1,1:j-1}^{-1} Sigma_{1:j-1,j}
// and gamma_j the innovation variances, so that Omega = Sigma^{-1} = T' D^{-1} T.
struct ModifiedCholesky {
    std::vector<VectorXd> delta;  // delta[j-2] has length j-1, j = 2..q
    VectorXd gamma;               // length q
};
ModifiedCholesky modified_cholesky_of_covariance(const MatrixXd& sigma);

}  // namespace gmcb::linalg
