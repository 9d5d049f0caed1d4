#include "gmcb/sampler_mh.hpp"

#include <cmath>

#include "gmcb/errors.hpp"

namespace gmcb {

GmcbMhSampler::GmcbMhSampler(const Dataset& data, const Hyperparams& hp,
                             const SamplerControl& ctl, std::uint64_t seed)
    : data_(data), hp_(hp), ctl_(ctl), rng_(seed) {
    data_.validate();
    hp_.validate();
    x_col_norms_ = data_.X.colwise().squaredNorm();
    init_state();
}

void GmcbMhSampler::init_state() {
    const int p = data_.p(), q = data_.q();
    state_ = make_initial_state(data_, hp_);
    refresh_residuals();

    // proposal scales start at 2.4 x a crude conditional sd and adapt from there
    plan_.step_b.resize(p, q);
    plan_.step_delta.clear();
    for (int j = 1; j <= q; ++j)
        for (int k = 1; k <= p; ++k)
            plan_.step_b(k - 1, j - 1) =
                ctl_.step_coef > 0.0
                    ? ctl_.step_coef
                    : 2.4 * std::sqrt(state_.gamma(j - 1) /
                                      std::max(x_col_norms_(k - 1), 1e-12));
    for (int j = 2; j <= q; ++j) {
        VectorXd s(j - 1);
        for (int k = 1; k < j; ++k)
            s(k - 1) = ctl_.step_coef > 0.0
                           ? ctl_.step_coef
                           : 2.4 * std::sqrt(state_.gamma(j - 1) /
                                             std::max(resid_.col(k - 1).squaredNorm(),
                                                      1e-12));
        plan_.step_delta.push_back(s);
    }
    plan_.alpha_ctl.step_alpha_b = plan_.alpha_ctl.step_alpha_d =
        ctl_.step_alpha > 0.0 ? ctl_.step_alpha : 0.1;
    plan_.alpha_ctl.adapt = ctl_.adapt;
    plan_.alpha_ctl.target_accept = ctl_.target_accept;
    plan_.alpha_ctl.validate();

    const double kernel = log_posterior_kernel(state_, data_, hp_);
    if (!std::isfinite(kernel)) {
        if (!std::isfinite(sequential_loglik(state_, data_)))
            throw SamplerError("initialization: non-finite likelihood term");
        throw SamplerError("initialization: non-finite prior term");
    }
}

void GmcbMhSampler::refresh_residuals() {
    resid_ = data_.Y - data_.X * state_.B;
    seq_resid_ = resid_;
    for (int j = 2; j <= data_.q(); ++j)
        seq_resid_.col(j - 1).noalias() -=
            resid_.leftCols(j - 1) * state_.delta[j - 2];
}

void GmcbMhSampler::set_state(const ParamState& state) {
    state.validate(hp_);
    if (state.p() != data_.p() || state.q() != data_.q())
        throw ConfigError("set_state: dimensions disagree with the data");
    state_ = state;
    refresh_residuals();
}

void GmcbMhSampler::set_response(const MatrixXd& y) {
    if (y.rows() != data_.Y.rows() || y.cols() != data_.Y.cols())
        throw DataError("set_response: response dimensions changed");
    data_.Y = y;
    refresh_residuals();
}

double GmcbMhSampler::b_element_log_ratio(int k, int j, double proposal) const {
    const double cur = state_.B(k - 1, j - 1);
    const double d = proposal - cur;
    const double ab = state_.alpha_b;
    double logr = -state_.Lambda(k - 1, j - 1) / (2.0 * state_.gamma(j - 1)) *
                  (std::pow(std::abs(proposal), ab) - std::pow(std::abs(cur), ab));
    const auto& x_col = data_.X.col(k - 1);
    const double xnorm2 = x_col_norms_(k - 1);
    // residual column j moves by -x_k d; columns m > j pick up +delta_{m,j} x_k d
    for (int m = j; m <= data_.q(); ++m) {
        const double c = (m == j) ? -1.0 : state_.delta[m - 2](j - 1);
        const double dot = seq_resid_.col(m - 1).dot(x_col);
        const double change = 2.0 * c * d * dot + c * c * d * d * xnorm2;
        logr -= 0.5 * change / state_.gamma(m - 1);
    }
    return logr;
}

void GmcbMhSampler::update_b_element(int k, int j, bool adapting) {
    double& step = plan_.step_b(k - 1, j - 1);
    const double cur = state_.B(k - 1, j - 1);
    const double proposal = cur + step * rng_.normal();
    const double logr = b_element_log_ratio(k, j, proposal);
    ++accept_.b_proposals;
    const bool accepted = std::log(rng_.u01()) < logr;
    if (accepted) {
        ++accept_.b_accepts;
        const double d = proposal - cur;
        state_.B(k - 1, j - 1) = proposal;
        resid_.col(j - 1).noalias() -= data_.X.col(k - 1) * d;
        seq_resid_.col(j - 1).noalias() -= data_.X.col(k - 1) * d;
        for (int m = j + 1; m <= data_.q(); ++m)
            seq_resid_.col(m - 1).noalias() +=
                state_.delta[m - 2](j - 1) * d * data_.X.col(k - 1);
    }
    if (adapting)
        step = robbins_monro_step(step, accepted, ctl_.target_accept, sweep_count_);
}

double GmcbMhSampler::delta_element_log_ratio(int j, int k, double proposal) const {
    const double cur = state_.delta[j - 2](k - 1);
    const double d = proposal - cur;
    const double ad = state_.alpha_d;
    const double g = state_.gamma(j - 1);
    double logr = -state_.tau[j - 2](k - 1) / (2.0 * g) *
                  (std::pow(std::abs(proposal), ad) - std::pow(std::abs(cur), ad));
    const auto& w_col = resid_.col(k - 1);
    const double change = -2.0 * d * seq_resid_.col(j - 1).dot(w_col) +
                          d * d * w_col.squaredNorm();
    logr -= 0.5 * change / g;
    return logr;
}

void GmcbMhSampler::update_delta_element(int j, int k, bool adapting) {
    double& step = plan_.step_delta[j - 2](k - 1);
    const double cur = state_.delta[j - 2](k - 1);
    const double proposal = cur + step * rng_.normal();
    const double logr = delta_element_log_ratio(j, k, proposal);
    ++accept_.delta_proposals;
    const bool accepted = std::log(rng_.u01()) < logr;
    if (accepted) {
        ++accept_.delta_accepts;
        state_.delta[j - 2](k - 1) = proposal;
        seq_resid_.col(j - 1).noalias() -= resid_.col(k - 1) * (proposal - cur);
    }
    if (adapting)
        step = robbins_monro_step(step, accepted, ctl_.target_accept, sweep_count_);
}

void GmcbMhSampler::sweep(bool adapting) {
    const int p = data_.p(), q = data_.q();
    gibbs_lambda(state_, hp_, rng_);
    if (trace) trace(UpdateKind::Lambda);
    for (int j = 1; j <= q; ++j)
        for (int k = 1; k <= p; ++k) update_b_element(k, j, adapting);
    if (trace) trace(UpdateKind::B);
    mh_alpha_b(state_, hp_, plan_.alpha_ctl, rng_, adapting, sweep_count_);
    if (trace) trace(UpdateKind::AlphaB);
    gibbs_tau(state_, hp_, rng_);
    if (trace) trace(UpdateKind::Tau);
    for (int j = 2; j <= q; ++j)
        for (int k = 1; k < j; ++k) update_delta_element(j, k, adapting);
    if (trace) trace(UpdateKind::Delta);
    gibbs_gamma(state_, seq_resid_.colwise().squaredNorm().transpose(), data_.n(),
                hp_, rng_);
    if (trace) trace(UpdateKind::Gamma);
    mh_alpha_d(state_, hp_, plan_.alpha_ctl, rng_, adapting, sweep_count_);
    if (trace) trace(UpdateKind::AlphaD);

    ++sweep_count_;
    if (sweep_count_ % 4096 == 0) refresh_residuals();  // bound float drift
}

ChainOutput GmcbMhSampler::run(long long iterations, long long burn_in,
                               long long thin) {
    if (burn_in < 0 || iterations <= burn_in || thin < 1)
        throw ConfigError("run: need iterations > burn_in >= 0 and thin >= 1");
    const int p = data_.p(), q = data_.q();
    linalg::reset_chol_stats();

    ChainOutput out;
    out.algorithm = "mh";
    out.p = p;
    out.q = q;
    out.iterations = iterations;
    out.burn_in = burn_in;
    out.thin = thin;
    allocate_samples(out, retained_sample_count(iterations, burn_in, thin));

    long long row = 0;
    for (long long t = 0; t < iterations; ++t) {
        sweep(ctl_.adapt && t < burn_in);
        if (t >= burn_in && (t - burn_in) % thin == 0) record_state(out, state_, row++);
    }

    accept_.alpha_b_proposals = plan_.alpha_ctl.alpha_b_proposals;
    accept_.alpha_b_accepts = plan_.alpha_ctl.alpha_b_accepts;
    accept_.alpha_d_proposals = plan_.alpha_ctl.alpha_d_proposals;
    accept_.alpha_d_accepts = plan_.alpha_ctl.alpha_d_accepts;
    auto rate = [](long long acc, long long prop) {
        return prop > 0 ? static_cast<double>(acc) / prop : 1.0;
    };
    accept_.b_rate = rate(accept_.b_accepts, accept_.b_proposals);
    accept_.delta_rate = rate(accept_.delta_accepts, accept_.delta_proposals);
    accept_.alpha_b_rate = rate(accept_.alpha_b_accepts, accept_.alpha_b_proposals);
    accept_.alpha_d_rate = rate(accept_.alpha_d_accepts, accept_.alpha_d_proposals);
    out.acceptance = accept_;
    out.frozen_step_b = plan_.step_b;
    out.frozen_step_delta = plan_.step_delta;
    out.frozen_step_alpha_b = plan_.alpha_ctl.step_alpha_b;
    out.frozen_step_alpha_d = plan_.alpha_ctl.step_alpha_d;
    out.max_factorization_dim = linalg::chol_stats().max_dim;
    out.transform = data_.transform;
    return out;
}

ChainOutput run_gmcb_mh(const Dataset& data, const Hyperparams& hp,
                        const SamplerControl& ctl, long long iterations,
                        long long burn_in, long long thin, std::uint64_t seed) {
    GmcbMhSampler sampler(data, hp, ctl, seed);
    ChainOutput out = sampler.run(iterations, burn_in, thin);
    out.seed = seed;
    return out;
}

}  // namespace gmcb
