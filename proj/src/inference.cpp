#include "gmcb/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gmcb/errors.hpp"

namespace gmcb {

namespace {

double condition_number(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

MatrixXd spd_inverse_or_throw(const MatrixXd& m, const char* what) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError(std::string(what) + ": matrix is singular (condition number " +
                           std::to_string(condition_number(m)) + ")");
    return llt.solve(MatrixXd::Identity(m.rows(), m.cols()));
}

// Sigma = T^{-1} D T^{-T} via triangular solves on the unit lower factor.
MatrixXd covariance_from_factors(const MatrixXd& t, const VectorXd& gamma) {
    const int q = static_cast<int>(gamma.size());
    MatrixXd l = t.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(q, q));
    return l * gamma.asDiagonal() * l.transpose();
}

double quantile_type7(std::vector<double>& v, double prob) {
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - std::floor(h)) * (v[hi] - v[lo]);
}

double logdet_spd_repaired(MatrixXd m, bool& warned, std::string& note) {
    const int d = static_cast<int>(m.rows());
    double jitter = 0.0;
    const double scale = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::LLT<MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) {
            const MatrixXd lower = llt.matrixL();
            const double ld = 2.0 * lower.diagonal().array().log().sum();
            if (std::isfinite(ld)) return ld;
        }
        jitter = (jitter == 0.0) ? 1e-12 * scale : jitter * 100.0;
        m.diagonal().array() += jitter;
        warned = true;
        note = "covariance repaired with jitter " + std::to_string(jitter);
    }
    throw NumericError("multivariate_ess: covariance could not be repaired; " +
                       std::to_string(d) + "-dimensional selection is degenerate");
}

}  // namespace

EstimateBundle bayes_estimates(const ChainOutput& chain, double ci_level) {
    const long long s_count = chain.sample_count();
    if (s_count < 2) throw ConfigError("bayes_estimates: need at least two samples");
    const int p = chain.p, q = chain.q;

    MatrixXd sum_b = MatrixXd::Zero(p, q);
    MatrixXd sum_omega = MatrixXd::Zero(q, q);
    MatrixXd sum_b_omega = MatrixXd::Zero(p, q);
    MatrixXd sum_omega_inv = MatrixXd::Zero(q, q);

    for (long long s = 0; s < s_count; ++s) {
        const MatrixXd b = chain.b_at(s);
        const auto delta = chain.delta_at(s);
        const VectorXd gamma = chain.gamma_samples.row(s).transpose();
        const CholeskyView view = build_cholesky_view(delta, gamma);
        sum_b += b;
        sum_omega += view.Omega;
        sum_b_omega += b * view.Omega;
        sum_omega_inv += covariance_from_factors(view.T, gamma);
    }

    EstimateBundle est;
    const double inv_s = 1.0 / static_cast<double>(s_count);
    est.b_f = sum_b * inv_s;
    est.omega_f = 0.5 * inv_s * (sum_omega + sum_omega.transpose());
    const MatrixXd mean_omega_inv = 0.5 * inv_s * (sum_omega_inv + sum_omega_inv.transpose());
    est.omega_s = spd_inverse_or_throw(mean_omega_inv, "omega_s estimator");
    est.omega_s = 0.5 * (est.omega_s + est.omega_s.transpose());
    const MatrixXd omega_f_inv = spd_inverse_or_throw(est.omega_f, "b_q estimator");
    est.b_q = (sum_b_omega * inv_s) * omega_f_inv;

    const CredibleIntervals ci = credible_intervals(chain, ci_level);
    est.ci_b = ci.b;
    est.ci_omega = ci.omega;
    est.ci_level = ci_level;
    return est;
}

EstimateBundle map_to_original_scale(const EstimateBundle& est,
                                     const Preprocessing& transform) {
    if (!transform.standardized) return est;
    EstimateBundle out = est;
    const VectorXd inv_scale = transform.x_scale.cwiseInverse();
    out.b_f = inv_scale.asDiagonal() * est.b_f;
    out.b_q = inv_scale.asDiagonal() * est.b_q;
    out.ci_b.lower = inv_scale.asDiagonal() * est.ci_b.lower;
    out.ci_b.upper = inv_scale.asDiagonal() * est.ci_b.upper;
    return out;
}

LossValues losses(const MatrixXd& b_est, const MatrixXd& omega_est,
                  const MatrixXd& b_truth, const MatrixXd& omega_truth) {
    if (b_est.rows() != b_truth.rows() || b_est.cols() != b_truth.cols() ||
        omega_est.rows() != omega_truth.rows())
        throw ConfigError("losses: dimensions disagree");
    const int q = static_cast<int>(omega_truth.rows());

    Eigen::LLT<MatrixXd> llt_truth(omega_truth);
    if (llt_truth.info() != Eigen::Success)
        throw NumericError("losses: truth precision is not positive definite");
    Eigen::LLT<MatrixXd> llt_est(omega_est);
    if (llt_est.info() != Eigen::Success)
        throw NumericError("losses: estimated precision is not positive definite");

    LossValues out;
    const MatrixXd db = b_est - b_truth;
    out.frob_b = db.squaredNorm();
    out.frob_omega = (omega_est - omega_truth).squaredNorm();
    out.l_q = (db * omega_truth * db.transpose()).trace();
    const MatrixXd ratio = llt_truth.solve(omega_est);  // Omega^{-1} Omega~
    const double ld_est =
        2.0 * MatrixXd(llt_est.matrixL()).diagonal().array().log().sum();
    const double ld_truth =
        2.0 * MatrixXd(llt_truth.matrixL()).diagonal().array().log().sum();
    out.l_s = ratio.trace() - (ld_est - ld_truth) - q;
    return out;
}

CredibleIntervals credible_intervals(const ChainOutput& chain, double level) {
    if (!(level > 0.0) || !(level < 1.0))
        throw ConfigError("credible_intervals: level must lie in (0,1)");
    const long long s_count = chain.sample_count();
    const int p = chain.p, q = chain.q;
    const double lo_p = (1.0 - level) / 2.0, hi_p = (1.0 + level) / 2.0;

    CredibleIntervals out;
    out.level = level;
    out.b.lower.resize(p, q);
    out.b.upper.resize(p, q);
    for (int idx = 0; idx < p * q; ++idx) {
        std::vector<double> v(chain.b_samples.col(idx).data(),
                              chain.b_samples.col(idx).data() + s_count);
        out.b.lower(idx % p, idx / p) = quantile_type7(v, lo_p);
        out.b.upper(idx % p, idx / p) = quantile_type7(v, hi_p);
    }

    // per-sample reconstruction of the distinct Omega entries
    MatrixXd omega_draws(s_count, q * (q + 1) / 2);
    for (long long s = 0; s < s_count; ++s) {
        const auto view = build_cholesky_view(chain.delta_at(s),
                                              chain.gamma_samples.row(s).transpose());
        int col = 0;
        for (int j = 0; j < q; ++j)
            for (int i = j; i < q; ++i) omega_draws(s, col++) = view.Omega(i, j);
    }
    out.omega.lower.resize(q, q);
    out.omega.upper.resize(q, q);
    int col = 0;
    for (int j = 0; j < q; ++j)
        for (int i = j; i < q; ++i) {
            std::vector<double> v(omega_draws.col(col).data(),
                                  omega_draws.col(col).data() + s_count);
            const double lo = quantile_type7(v, lo_p);
            const double hi = quantile_type7(v, hi_p);
            out.omega.lower(i, j) = out.omega.lower(j, i) = lo;
            out.omega.upper(i, j) = out.omega.upper(j, i) = hi;
            ++col;
        }
    return out;
}

MatrixXd coverage_indicators(const IntervalPair& ci, const MatrixXd& truth) {
    return ((truth.array() >= ci.lower.array()) &&
            (truth.array() <= ci.upper.array()))
        .cast<double>();
}

MessResult multivariate_ess(const MatrixXd& series) {
    const long long s_count = series.rows();
    const int d = static_cast<int>(series.cols());
    if (s_count < 8) throw ConfigError("multivariate_ess: chain too short");

    MessResult out;
    if (s_count < 100LL * d) {
        out.warned = true;
        out.note = "selection dimension is large relative to the chain length";
    }

    const Eigen::RowVectorXd mean = series.colwise().mean();
    const MatrixXd centered = series.rowwise() - mean;
    const MatrixXd lambda_hat =
        centered.transpose() * centered / static_cast<double>(s_count - 1);

    const long long batch = static_cast<long long>(std::floor(std::sqrt(
        static_cast<double>(s_count))));
    const long long m = s_count / batch;
    MatrixXd batch_means(m, d);
    for (long long k = 0; k < m; ++k)
        batch_means.row(k) = series.middleRows(k * batch, batch).colwise().mean();
    const Eigen::RowVectorXd bm_mean = batch_means.colwise().mean();
    const MatrixXd bm_centered = batch_means.rowwise() - bm_mean;
    const MatrixXd sigma_hat = static_cast<double>(batch) *
                               (bm_centered.transpose() * bm_centered) /
                               static_cast<double>(m - 1);

    const double ld_lambda = logdet_spd_repaired(lambda_hat, out.warned, out.note);
    const double ld_sigma = logdet_spd_repaired(sigma_hat, out.warned, out.note);
    out.value = static_cast<double>(s_count) *
                std::exp((ld_lambda - ld_sigma) / static_cast<double>(d));
    return out;
}

MatrixXd mess_default_series(const ChainOutput& chain) {
    const long long s_count = chain.sample_count();
    const int p = chain.p, q = chain.q;
    MatrixXd series(s_count, p * q + q * (q + 1) / 2);
    series.leftCols(p * q) = chain.b_samples;
    for (long long s = 0; s < s_count; ++s) {
        const auto view = build_cholesky_view(chain.delta_at(s),
                                              chain.gamma_samples.row(s).transpose());
        int col = p * q;
        for (int j = 0; j < q; ++j)
            for (int i = j; i < q; ++i) series(s, col++) = view.Omega(i, j);
    }
    return series;
}

MessResult multivariate_ess(const ChainOutput& chain) {
    return multivariate_ess(mess_default_series(chain));
}

MleFit mle(const Dataset& data) {
    const int n = data.n();
    if (n <= data.p())
        throw ConfigError("mle: need n > p");
    Eigen::LLT<MatrixXd> llt(data.X.transpose() * data.X);
    if (llt.info() != Eigen::Success)
        throw SingularSystemError("mle: X'X is rank deficient");
    MleFit fit;
    fit.B = llt.solve(data.X.transpose() * data.Y);
    const MatrixXd resid = data.Y - data.X * fit.B;
    const MatrixXd cov = resid.transpose() * resid / static_cast<double>(n);
    Eigen::LLT<MatrixXd> llt_cov(cov);
    if (llt_cov.info() != Eigen::Success)
        throw SingularSystemError("mle: residual covariance is singular");
    fit.Omega = llt_cov.solve(MatrixXd::Identity(cov.rows(), cov.cols()));
    fit.Omega = 0.5 * (fit.Omega + fit.Omega.transpose());
    return fit;
}

}  // namespace gmcb
