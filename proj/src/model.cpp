#include "gmcb/model.hpp"

#include <cmath>
#include <limits>

#include "gmcb/errors.hpp"

namespace gmcb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of a gamma mixture density at x > 0 with equal component weights dropped
double log_gamma_mixture(double x, const GammaMixturePrior& mix) {
    const double lx = std::log(x);
    const double t1 = mix.e1 * std::log(mix.f1) - std::lgamma(mix.e1) +
                      (mix.e1 - 1.0) * lx - mix.f1 * x;
    const double t2 = mix.e2 * std::log(mix.f2) - std::lgamma(mix.e2) +
                      (mix.e2 - 1.0) * lx - mix.f2 * x;
    return log_sum_exp(t1, t2);
}

}  // namespace

void Dataset::validate() const {
    if (Y.rows() < 2) throw DataError("dataset: need at least two rows");
    if (X.rows() != Y.rows()) throw DataError("dataset: X and Y row counts differ");
    if (X.cols() < 1 || Y.cols() < 1) throw DataError("dataset: empty X or Y");
    if (!Y.allFinite() || !X.allFinite())
        throw DataError("dataset: non-finite entries");
    if (transform.standardized) {
        const double n = static_cast<double>(X.rows());
        for (int k = 0; k < X.cols(); ++k) {
            const double mean = X.col(k).mean();
            const double sd = std::sqrt(X.col(k).squaredNorm() / n - mean * mean);
            if (std::abs(mean) > 1e-8 || std::abs(sd - 1.0) > 1e-8)
                throw DataError("dataset: column " + std::to_string(k) +
                                " is not standardized");
        }
    }
}

Dataset preprocess(const MatrixXd& y, const MatrixXd& x, bool center_y,
                   bool standardize_x) {
    Dataset out;
    out.Y = y;
    out.X = x;
    const int n = static_cast<int>(y.rows());
    const int p = static_cast<int>(x.cols());
    const int q = static_cast<int>(y.cols());
    out.transform.y_center = VectorXd::Zero(q);
    out.transform.x_center = VectorXd::Zero(p);
    out.transform.x_scale = VectorXd::Ones(p);
    if (center_y) {
        out.transform.centered = true;
        for (int j = 0; j < q; ++j) {
            out.transform.y_center(j) = y.col(j).mean();
            out.Y.col(j).array() -= out.transform.y_center(j);
        }
    }
    if (standardize_x) {
        out.transform.standardized = true;
        for (int k = 0; k < p; ++k) {
            const double mean = x.col(k).mean();
            const double sd =
                std::sqrt(x.col(k).squaredNorm() / n - mean * mean);
            if (!(sd > 0.0))
                throw DataError("preprocess: X column " + std::to_string(k) +
                                " is constant; disable standardization for "
                                "intercept-only designs");
            out.transform.x_center(k) = mean;
            out.transform.x_scale(k) = sd;
            out.X.col(k) = (x.col(k).array() - mean) / sd;
        }
    }
    out.validate();
    return out;
}

void Hyperparams::validate() const {
    if (!(k1 > 0.0) || !(k1 <= 1.0)) throw ConfigError("hyperparams: need 0 < k1 <= 1");
    if (!(k2 >= 2.0)) throw ConfigError("hyperparams: need k2 >= 2");
    for (double v : {lambda_mix.e1, lambda_mix.f1, lambda_mix.e2, lambda_mix.f2,
                     tau_mix.e1, tau_mix.f1, tau_mix.e2, tau_mix.f2, a, b})
        if (!(v > 0.0)) throw ConfigError("hyperparams: shapes and rates must be positive");
}

void ParamState::validate(const Hyperparams& hp) const {
    const int pp = p(), qq = q();
    if (Lambda.rows() != pp || Lambda.cols() != qq)
        throw ConfigError("state: Lambda shape mismatch");
    if ((Lambda.array() <= 0.0).any()) throw ConfigError("state: Lambda must be positive");
    if (gamma.size() != qq || (gamma.array() <= 0.0).any())
        throw ConfigError("state: gamma must be positive, length q");
    if (static_cast<int>(delta.size()) != qq - 1 ||
        static_cast<int>(tau.size()) != qq - 1)
        throw ConfigError("state: delta/tau must have q-1 blocks");
    for (int j = 2; j <= qq; ++j) {
        if (delta[j - 2].size() != j - 1 || tau[j - 2].size() != j - 1)
            throw ConfigError("state: delta_" + std::to_string(j) + " must have length " +
                              std::to_string(j - 1));
        if ((tau[j - 2].array() <= 0.0).any())
            throw ConfigError("state: tau must be positive");
    }
    if (alpha_b < hp.k1 || alpha_b > hp.k2 || alpha_d < hp.k1 || alpha_d > hp.k2)
        throw ConfigError("state: alpha outside [k1,k2]");
}

MatrixXd build_t_matrix(const std::vector<VectorXd>& delta, int q) {
    MatrixXd t = MatrixXd::Identity(q, q);
    for (int j = 2; j <= q; ++j)
        t.row(j - 1).head(j - 1) = -delta[j - 2].transpose();
    return t;
}

CholeskyView build_cholesky_view(const std::vector<VectorXd>& delta,
                                 const VectorXd& gamma) {
    const int q = static_cast<int>(gamma.size());
    if ((gamma.array() <= 0.0).any())
        throw ConfigError("build_cholesky_view: gamma must be positive");
    if (static_cast<int>(delta.size()) != q - 1)
        throw ConfigError("build_cholesky_view: delta must have q-1 blocks");
    CholeskyView view;
    view.T = build_t_matrix(delta, q);
    view.Dinv = gamma.cwiseInverse();
    view.Omega = view.T.transpose() * view.Dinv.asDiagonal() * view.T;
    view.Omega = 0.5 * (view.Omega + view.Omega.transpose());
    return view;
}

SvdCache make_svd_cache(const MatrixXd& x) {
    Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdCache cache;
    cache.U = svd.matrixU();
    cache.V = svd.matrixV();
    cache.C = MatrixXd::Zero(x.rows(), x.cols());
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() ? sv(0) * 1e-12 : 0.0;
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) cache.C(r, r) = sv(i), ++r;
    cache.rank = r;
    return cache;
}

void SvdCache::validate(const MatrixXd& x) const {
    const int n = static_cast<int>(x.rows());
    const int p = static_cast<int>(x.cols());
    const double eye_u = (U.transpose() * U - MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    const double eye_v = (V.transpose() * V - MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    const double recon = (U * C * V.transpose() - x).cwiseAbs().maxCoeff();
    const double scale = std::max(x.cwiseAbs().maxCoeff(), 1e-30);
    if (eye_u > 1e-8 || eye_v > 1e-8 || recon > 1e-8 * scale)
        throw NumericError("svd cache: reconstruction check failed");
}

double sequential_loglik(const ParamState& state, const Dataset& data) {
    const int n = data.n(), q = data.q();
    if (state.p() != data.p() || state.q() != q)
        throw ConfigError("sequential_loglik: state/data dimensions disagree");
    const MatrixXd resid = data.Y - data.X * state.B;
    double ll = -0.5 * n * q * kLog2Pi;
    for (int j = 1; j <= q; ++j) {
        VectorXd f = resid.col(j - 1);
        if (j >= 2) f.noalias() -= resid.leftCols(j - 1) * state.delta[j - 2];
        const double g = state.gamma(j - 1);
        ll += -0.5 * n * std::log(g) - 0.5 * f.squaredNorm() / g;
    }
    return ll;
}

double log_posterior_kernel(const ParamState& state, const Dataset& data,
                            const Hyperparams& hp) {
    const int n = data.n(), p = state.p(), q = state.q();

    // support checks return -inf rather than throwing
    if (state.alpha_b < hp.k1 || state.alpha_b > hp.k2) return kNegInf;
    if (state.alpha_d < hp.k1 || state.alpha_d > hp.k2) return kNegInf;
    if ((state.gamma.array() <= 0.0).any()) return kNegInf;
    if ((state.Lambda.array() <= 0.0).any()) return kNegInf;
    for (const auto& t : state.tau)
        if ((t.array() <= 0.0).any()) return kNegInf;

    const double ab = state.alpha_b, ad = state.alpha_d;
    double lp = 0.0;

    // likelihood in autoregression form (2 pi constant dropped)
    const MatrixXd resid = data.Y - data.X * state.B;
    for (int j = 1; j <= q; ++j) {
        VectorXd f = resid.col(j - 1);
        if (j >= 2) f.noalias() -= resid.leftCols(j - 1) * state.delta[j - 2];
        const double g = state.gamma(j - 1);
        lp += -0.5 * n * std::log(g) - 0.5 * f.squaredNorm() / g;
    }

    // exponential power prior on B plus its lambda mixture
    lp += p * q * (std::log(ab) - std::log(2.0) / ab - std::lgamma(1.0 / ab));
    for (int j = 0; j < q; ++j) {
        const double g = state.gamma(j);
        for (int k = 0; k < p; ++k) {
            const double lam = state.Lambda(k, j);
            lp += (std::log(lam) - std::log(g)) / ab;
            lp += -0.5 * (lam / g) * std::pow(std::abs(state.B(k, j)), ab);
            lp += log_gamma_mixture(lam, hp.lambda_mix);
        }
    }

    // inverse-gamma prior on gamma
    for (int j = 0; j < q; ++j)
        lp += -(hp.a + 1.0) * std::log(state.gamma(j)) - hp.b / state.gamma(j);

    // exponential power prior on delta plus its tau mixture
    for (int j = 2; j <= q; ++j) {
        const double g = state.gamma(j - 1);
        lp += (j - 1) * (std::log(ad) - std::log(2.0) / ad - std::lgamma(1.0 / ad) -
                         std::log(g) / ad);
        for (int k = 0; k < j - 1; ++k) {
            const double tau = state.tau[j - 2](k);
            lp += std::log(tau) / ad;
            lp += -0.5 * (tau / g) * std::pow(std::abs(state.delta[j - 2](k)), ad);
            lp += log_gamma_mixture(tau, hp.tau_mix);
        }
    }
    return lp;
}

ParamState make_initial_state(const Dataset& data, const Hyperparams& hp) {
    const int n = data.n(), p = data.p(), q = data.q();
    ParamState state;
    MatrixXd xtx = data.X.transpose() * data.X;
    xtx.diagonal().array() += 1.0;
    state.B = xtx.ldlt().solve(data.X.transpose() * data.Y);
    state.Lambda = MatrixXd::Ones(p, q);
    state.alpha_b = state.alpha_d = 0.5 * (hp.k1 + hp.k2);
    state.gamma = VectorXd::Ones(q);

    MatrixXd resid = data.Y - data.X * state.B;
    MatrixXd seq = resid;
    for (int j = 2; j <= q; ++j) {
        const auto w = resid.leftCols(j - 1);
        state.delta.push_back(w.colPivHouseholderQr().solve(resid.col(j - 1)));
        state.tau.push_back(VectorXd::Ones(j - 1));
        seq.col(j - 1).noalias() -= w * state.delta[j - 2];
    }
    for (int j = 0; j < q; ++j)
        state.gamma(j) = std::max(seq.col(j).squaredNorm() / n, 1e-6);
    return state;
}

MomGammaPrior method_of_moments_gamma_prior(const Dataset& data) {
    const int n = data.n(), p = data.p(), q = data.q();
    if (n <= p + q)
        throw ConfigError("method_of_moments_gamma_prior: need n > p + q");
    VectorXd v(q);
    for (int j = 1; j <= q; ++j) {
        // regress Y^j on X and the previous response columns
        MatrixXd design(n, p + j - 1);
        design.leftCols(p) = data.X;
        if (j >= 2) design.rightCols(j - 1) = data.Y.leftCols(j - 1);
        const VectorXd coef = design.colPivHouseholderQr().solve(data.Y.col(j - 1));
        const double rss = (data.Y.col(j - 1) - design * coef).squaredNorm();
        v(j - 1) = rss / static_cast<double>(n - p - (j - 1));
    }
    const double mean = v.mean();
    double var = 0.0;
    if (q > 1) var = (v.array() - mean).square().sum() / static_cast<double>(q - 1);

    MomGammaPrior out;
    if (!(var > 0.0)) {
        out.a = 3.0;
        out.b = 2.0 * mean;
        out.fallback = true;
        return out;
    }
    out.a = std::max(2.0 + mean * mean / var, 2.01);
    out.b = (out.a - 1.0) * mean;
    return out;
}

}  // namespace gmcb
