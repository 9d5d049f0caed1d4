#include "gmcb/linalg.hpp"

#include <cmath>

#include "gmcb/errors.hpp"

namespace gmcb::linalg {

CholStats& chol_stats() {
    thread_local CholStats stats;
    return stats;
}

void reset_chol_stats() {
    chol_stats() = CholStats{};
}

MatrixXd symmetrize_checked(const MatrixXd& q, double rel_tol) {
    if (q.rows() != q.cols()) throw NumericError("symmetrize: matrix is not square");
    const double scale = q.cwiseAbs().maxCoeff();
    const double asym = (q - q.transpose()).cwiseAbs().maxCoeff();
    if (asym > rel_tol * std::max(scale, 1.0))
        throw NumericError("symmetrize: asymmetry " + std::to_string(asym) +
                           " exceeds tolerance");
    return 0.5 * (q + q.transpose());
}

MatrixXd chol(const MatrixXd& spd) {
    auto& stats = chol_stats();
    const int m = static_cast<int>(spd.rows());
    stats.max_dim = std::max(stats.max_dim, m);
    ++stats.count;

    Eigen::LLT<MatrixXd> llt(spd);
    if (llt.info() == Eigen::Success) {
        const MatrixXd lower = llt.matrixL();
        if (lower.diagonal().minCoeff() > 0.0 && lower.allFinite()) return lower;
    }
    // Diagnostic pass to locate the failing pivot.
    MatrixXd a = spd;
    for (int k = 0; k < m; ++k) {
        if (!(a(k, k) > 0.0) || !std::isfinite(a(k, k)))
            throw NotPositiveDefiniteError("chol: matrix is not positive definite", k);
        const double piv = std::sqrt(a(k, k));
        a.col(k).tail(m - k) /= piv;
        for (int j = k + 1; j < m; ++j)
            a.col(j).tail(m - j) -= a(j, k) * a.col(k).tail(m - j);
    }
    throw NotPositiveDefiniteError("chol: factorization failed", m - 1);
}

double logdet_from_chol(const MatrixXd& lower) {
    return 2.0 * lower.diagonal().array().log().sum();
}

MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int j = 0; j < a.cols(); ++j)
        for (int i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ModifiedCholesky modified_cholesky_of_covariance(const MatrixXd& sigma) {
    const int q = static_cast<int>(sigma.rows());
    if (sigma.cols() != q || q < 1)
        throw NumericError("modified_cholesky: covariance must be square");
    ModifiedCholesky out;
    out.gamma.resize(q);
    out.gamma(0) = sigma(0, 0);
    if (!(out.gamma(0) > 0.0))
        throw NotPositiveDefiniteError("modified_cholesky: leading variance", 0);
    for (int j = 2; j <= q; ++j) {
        const auto head = sigma.topLeftCorner(j - 1, j - 1);
        const VectorXd cross = sigma.col(j - 1).head(j - 1);
        Eigen::LLT<MatrixXd> llt(head);
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefiniteError("modified_cholesky: leading block", j - 1);
        VectorXd d = llt.solve(cross);
        out.gamma(j - 1) = sigma(j - 1, j - 1) - cross.dot(d);
        if (!(out.gamma(j - 1) > 0.0))
            throw NotPositiveDefiniteError("modified_cholesky: innovation variance", j - 1);
        out.delta.push_back(std::move(d));
    }
    return out;
}

}  // namespace gmcb::linalg
