#include "gmcb/sampler_smn.hpp"

#include <algorithm>
#include <cmath>

#include "gmcb/dist.hpp"
#include "gmcb/errors.hpp"

namespace gmcb {

namespace {

// heavy-tailed stable draws are clamped before entering a precision assembly
double clamp_scale(double w) {
    if (!std::isfinite(w)) return 1e300;
    return std::clamp(w, 1e-300, 1e300);
}

double tilt_for(double coef, double lam, double gam, double alpha) {
    const double two_over_a = 2.0 / alpha;
    double tilt = std::pow(lam, two_over_a) * coef * coef /
                  (2.0 * std::pow(2.0 * gam, two_over_a));
    if (!std::isfinite(tilt)) tilt = 1e300;
    return tilt;
}

}  // namespace

GmcbSmnSampler::GmcbSmnSampler(const Dataset& data, const Hyperparams& hp,
                               const SamplerControl& ctl, std::uint64_t seed)
    : data_(data), hp_(hp), ctl_(ctl), rng_(seed) {
    data_.validate();
    hp_.validate();
    if (hp_.k2 != 2.0)
        throw ConfigError(
            "GMCB-SMN requires k2 = 2 exactly; use GMCB-MH for k2 > 2");

    const int n = data_.n(), p = data_.p(), q = data_.q();
    use_svd_path_ = p >= n;
    keep_raw_resid_ = (q > n) || (n <= 10000);

    xtx_ = data_.X.transpose() * data_.X;
    x_checksum_ = data_.X.sum();
    if (use_svd_path_) {
        svd_ = make_svd_cache(data_.X);
        svd_.validate(data_.X);
    }
    rebuild_response_caches();

    state_ = make_initial_state(data_, hp_);
    latents_.omega.resize(p, q);
    for (int j = 2; j <= q; ++j) latents_.epsilon.emplace_back(VectorXd::Ones(j - 1));
    rebuild_residual_caches();

    alpha_ctl_.step_alpha_b = alpha_ctl_.step_alpha_d =
        ctl_.step_alpha > 0.0 ? ctl_.step_alpha : 0.1;
    alpha_ctl_.adapt = ctl_.adapt;
    alpha_ctl_.target_accept = ctl_.target_accept;
    alpha_ctl_.upper_cap = 2.0 - 1e-9;  // keeps the stable index inside (0,1)
    alpha_ctl_.validate();

    if (!std::isfinite(log_posterior_kernel(state_, data_, hp_))) {
        if (!std::isfinite(sequential_loglik(state_, data_)))
            throw SamplerError("initialization: non-finite likelihood term");
        throw SamplerError("initialization: non-finite prior term");
    }
}

void GmcbSmnSampler::rebuild_response_caches() {
    xty_ = data_.X.transpose() * data_.Y;
    yty_ = data_.Y.transpose() * data_.Y;
    if (use_svd_path_ || force_structured_b_) uty_ = svd_.U.transpose() * data_.Y;
}

void GmcbSmnSampler::rebuild_residual_caches() {
    if (keep_raw_resid_) {
        raw_resid_ = data_.Y - data_.X * state_.B;
        ete_ = raw_resid_.transpose() * raw_resid_;
    } else {
        ete_ = yty_ - xty_.transpose() * state_.B - state_.B.transpose() * xty_ +
               state_.B.transpose() * (xtx_ * state_.B);
        ete_ = 0.5 * (ete_ + ete_.transpose());
    }
}

void GmcbSmnSampler::force_structured_b(bool on) {
    force_structured_b_ = on;
    if (on && svd_.U.size() == 0) {
        svd_ = make_svd_cache(data_.X);
        svd_.validate(data_.X);
        uty_ = svd_.U.transpose() * data_.Y;
    }
}

void GmcbSmnSampler::set_state(const ParamState& state) {
    state.validate(hp_);
    if (state.p() != data_.p() || state.q() != data_.q())
        throw ConfigError("set_state: dimensions disagree with the data");
    state_ = state;
    rebuild_residual_caches();
}

void GmcbSmnSampler::set_response(const MatrixXd& y) {
    if (y.rows() != data_.Y.rows() || y.cols() != data_.Y.cols())
        throw DataError("set_response: response dimensions changed");
    data_.Y = y;
    rebuild_response_caches();
    rebuild_residual_caches();
}

void GmcbSmnSampler::draw_omega() {
    const double stability = 0.5 * state_.alpha_b;
    for (int j = 0; j < state_.q(); ++j)
        for (int k = 0; k < state_.p(); ++k) {
            const double tilt = tilt_for(state_.B(k, j), state_.Lambda(k, j),
                                         state_.gamma(j), state_.alpha_b);
            latents_.omega(k, j) = sample_tilted_stable({stability, tilt}, rng_);
        }
}

void GmcbSmnSampler::draw_epsilon() {
    const double stability = 0.5 * state_.alpha_d;
    for (int j = 2; j <= state_.q(); ++j) {
        auto& eps = latents_.epsilon[j - 2];
        for (int k = 0; k < j - 1; ++k) {
            const double tilt = tilt_for(state_.delta[j - 2](k), state_.tau[j - 2](k),
                                         state_.gamma(j - 1), state_.alpha_d);
            eps(k) = sample_tilted_stable({stability, tilt}, rng_);
        }
    }
}

VectorXd GmcbSmnSampler::delta_diag() const {
    const int p = state_.p(), q = state_.q();
    const double two_over_a = 2.0 / state_.alpha_b;
    VectorXd d(p * q);
    for (int j = 0; j < q; ++j) {
        const double denom = std::pow(2.0 * state_.gamma(j), two_over_a);
        for (int k = 0; k < p; ++k)
            d(j * p + k) =
                clamp_scale(clamp_scale(latents_.omega(k, j)) *
                            std::pow(state_.Lambda(k, j), two_over_a) / denom);
    }
    return d;
}

VectorXd GmcbSmnSampler::psi_diag(int j) const {
    const double two_over_a = 2.0 / state_.alpha_d;
    const double denom = std::pow(2.0 * state_.gamma(j - 1), two_over_a);
    const auto& eps = latents_.epsilon[j - 2];
    const auto& tau = state_.tau[j - 2];
    VectorXd d(j - 1);
    for (int k = 0; k < j - 1; ++k)
        d(k) = clamp_scale(clamp_scale(eps(k)) * std::pow(tau(k), two_over_a) / denom);
    return d;
}

void GmcbSmnSampler::draw_b_block() {
    const int p = state_.p(), q = state_.q();
    const VectorXd dd = delta_diag();
    const CholeskyView view = build_cholesky_view(state_.delta, state_.gamma);

    if (!use_svd_path_ && !force_structured_b_) {
        // direct draw: precision Omega (x) X'X + Delta, shift vec(X'Y Omega)
        GaussianByPrecision spec;
        spec.precision = linalg::kron(view.Omega, xtx_);
        spec.precision.diagonal() += dd;
        MatrixXd h = xty_ * view.Omega;
        spec.shift = Eigen::Map<VectorXd>(h.data(), p * q);
        const VectorXd draw = sample_gaussian_by_precision(spec, rng_);
        state_.B = Eigen::Map<const MatrixXd>(draw.data(), p, q);
    } else {
        // eta = V' B T' transformation; the prior covariance of vec(eta)
        // factors as (T (x) V') Delta^{-1/2} times its transpose
        StructuredGaussianSpec spec;
        spec.prior_cov_factor = linalg::kron(view.T, svd_.V.transpose());
        for (int i = 0; i < p * q; ++i)
            spec.prior_cov_factor.col(i) /= std::sqrt(dd(i));
        const MatrixXd droot_dense = view.Dinv.cwiseSqrt().asDiagonal();
        spec.data_map = linalg::kron(droot_dense, svd_.C);
        MatrixXd rhs = uty_ * view.T.transpose();  // n x q
        for (int j = 0; j < q; ++j) rhs.col(j) *= std::sqrt(view.Dinv(j));
        spec.rhs = Eigen::Map<VectorXd>(rhs.data(), data_.n() * q);
        const VectorXd eta_vec = sample_gaussian_structured(spec, rng_);
        const MatrixXd eta = Eigen::Map<const MatrixXd>(eta_vec.data(), p, q);
        // B = V eta (T')^{-1}
        const MatrixXd m =
            view.T.triangularView<Eigen::Lower>().solve(eta.transpose());
        state_.B = svd_.V * m.transpose();
    }
    rebuild_residual_caches();
}

void GmcbSmnSampler::draw_delta_block(int j) {
    const int n = data_.n();
    const VectorXd psi = psi_diag(j);
    const double g = state_.gamma(j - 1);

    if (j <= n) {
        GaussianByPrecision spec;
        spec.precision = ete_.topLeftCorner(j - 1, j - 1) / g;
        spec.precision.diagonal() += psi;
        spec.shift = ete_.col(j - 1).head(j - 1) / g;
        state_.delta[j - 2] = sample_gaussian_by_precision(spec, rng_);
    } else {
        StructuredGaussianSpec spec;
        spec.prior_cov_factor = psi.cwiseSqrt().cwiseInverse().asDiagonal();
        spec.data_map = raw_resid_.leftCols(j - 1) / std::sqrt(g);
        spec.rhs = raw_resid_.col(j - 1) / std::sqrt(g);
        state_.delta[j - 2] = sample_gaussian_structured(spec, rng_);
    }
}

VectorXd GmcbSmnSampler::sequential_ss_from_cross() const {
    const int q = state_.q();
    VectorXd ss(q);
    ss(0) = ete_(0, 0);
    for (int j = 2; j <= q; ++j) {
        const auto& d = state_.delta[j - 2];
        const auto head = ete_.topLeftCorner(j - 1, j - 1);
        const auto cross = ete_.col(j - 1).head(j - 1);
        ss(j - 1) = ete_(j - 1, j - 1) - 2.0 * d.dot(cross) + d.dot(head * d);
    }
    return ss.cwiseMax(0.0);
}

void GmcbSmnSampler::sweep(bool adapting) {
    draw_omega();
    if (trace) trace(UpdateKind::Omega);
    draw_b_block();
    if (trace) trace(UpdateKind::B);
    gibbs_lambda(state_, hp_, rng_);
    if (trace) trace(UpdateKind::Lambda);
    mh_alpha_b(state_, hp_, alpha_ctl_, rng_, adapting, sweep_count_);
    if (trace) trace(UpdateKind::AlphaB);
    draw_epsilon();
    if (trace) trace(UpdateKind::Epsilon);
    for (int j = 2; j <= state_.q(); ++j) draw_delta_block(j);
    if (trace) trace(UpdateKind::Delta);
    gibbs_tau(state_, hp_, rng_);
    if (trace) trace(UpdateKind::Tau);
    gibbs_gamma(state_, sequential_ss_from_cross(), data_.n(), hp_, rng_);
    if (trace) trace(UpdateKind::Gamma);
    mh_alpha_d(state_, hp_, alpha_ctl_, rng_, adapting, sweep_count_);
    if (trace) trace(UpdateKind::AlphaD);
    ++sweep_count_;
}

ChainOutput GmcbSmnSampler::run(long long iterations, long long burn_in,
                                long long thin) {
    if (burn_in < 0 || iterations <= burn_in || thin < 1)
        throw ConfigError("run: need iterations > burn_in >= 0 and thin >= 1");
    linalg::reset_chol_stats();

    ChainOutput out;
    out.algorithm = "smn";
    out.p = state_.p();
    out.q = state_.q();
    out.iterations = iterations;
    out.burn_in = burn_in;
    out.thin = thin;
    allocate_samples(out, retained_sample_count(iterations, burn_in, thin));

    long long row = 0;
    for (long long t = 0; t < iterations; ++t) {
        sweep(ctl_.adapt && t < burn_in);
        if (t >= burn_in && (t - burn_in) % thin == 0) record_state(out, state_, row++);
    }

    out.acceptance.alpha_b_proposals = alpha_ctl_.alpha_b_proposals;
    out.acceptance.alpha_b_accepts = alpha_ctl_.alpha_b_accepts;
    out.acceptance.alpha_d_proposals = alpha_ctl_.alpha_d_proposals;
    out.acceptance.alpha_d_accepts = alpha_ctl_.alpha_d_accepts;
    auto rate = [](long long acc, long long prop) {
        return prop > 0 ? static_cast<double>(acc) / prop : 1.0;
    };
    out.acceptance.alpha_b_rate =
        rate(alpha_ctl_.alpha_b_accepts, alpha_ctl_.alpha_b_proposals);
    out.acceptance.alpha_d_rate =
        rate(alpha_ctl_.alpha_d_accepts, alpha_ctl_.alpha_d_proposals);
    out.frozen_step_alpha_b = alpha_ctl_.step_alpha_b;
    out.frozen_step_alpha_d = alpha_ctl_.step_alpha_d;
    out.max_factorization_dim = linalg::chol_stats().max_dim;
    out.transform = data_.transform;
    return out;
}

ChainOutput run_gmcb_smn(const Dataset& data, const Hyperparams& hp,
                         const SamplerControl& ctl, long long iterations,
                         long long burn_in, long long thin, std::uint64_t seed) {
    GmcbSmnSampler sampler(data, hp, ctl, seed);
    ChainOutput out = sampler.run(iterations, burn_in, thin);
    out.seed = seed;
    return out;
}

}  // namespace gmcb
