#include "gmcb/conditionals.hpp"

#include <algorithm>
#include <cmath>

#include "gmcb/dist.hpp"
#include "gmcb/errors.hpp"

namespace gmcb {

void MhControl::validate() const {
    if (!(step_alpha_b > 0.0) || !(step_alpha_d > 0.0))
        throw ConfigError("mh control: step sizes must be positive");
    if (!(target_accept > 0.1) || !(target_accept < 0.6))
        throw ConfigError("mh control: target acceptance must lie in (0.1, 0.6)");
}

double robbins_monro_step(double step, bool accepted, double target, long long t) {
    const double gain = std::pow(static_cast<double>(t) + 10.0, -0.6);
    double out = step * std::exp(gain * ((accepted ? 1.0 : 0.0) - target));
    return std::clamp(out, 1e-8, 1e6);
}

namespace {

// log weight of mixture component (e, f) given penalty exponent a and the
// accumulated rate increment r = |x|^a / (2 gamma)
double mixture_log_weight(double e, double f, double inv_a, double r) {
    return e * std::log(f) - std::lgamma(e) + std::lgamma(e + inv_a) -
           (e + inv_a) * std::log(f + r);
}

double draw_mixture(const GammaMixturePrior& mix, double inv_a, double r,
                    RngStream& rng) {
    const double lw1 = mixture_log_weight(mix.e1, mix.f1, inv_a, r);
    const double lw2 = mixture_log_weight(mix.e2, mix.f2, inv_a, r);
    return sample_two_component_gamma(lw1, mix.e1 + inv_a, mix.f1 + r,
                                      lw2, mix.e2 + inv_a, mix.f2 + r, rng);
}

}  // namespace

void gibbs_lambda(ParamState& state, const Hyperparams& hp, RngStream& rng) {
    const double inv_a = 1.0 / state.alpha_b;
    for (int j = 0; j < state.q(); ++j) {
        const double two_gamma = 2.0 * state.gamma(j);
        for (int k = 0; k < state.p(); ++k) {
            const double r = std::pow(std::abs(state.B(k, j)), state.alpha_b) / two_gamma;
            state.Lambda(k, j) = draw_mixture(hp.lambda_mix, inv_a, r, rng);
        }
    }
}

void gibbs_tau(ParamState& state, const Hyperparams& hp, RngStream& rng) {
    const double inv_a = 1.0 / state.alpha_d;
    for (int j = 2; j <= state.q(); ++j) {
        const double two_gamma = 2.0 * state.gamma(j - 1);
        auto& tau_j = state.tau[j - 2];
        const auto& delta_j = state.delta[j - 2];
        for (int k = 0; k < j - 1; ++k) {
            const double r = std::pow(std::abs(delta_j(k)), state.alpha_d) / two_gamma;
            tau_j(k) = draw_mixture(hp.tau_mix, inv_a, r, rng);
        }
    }
}

void gibbs_gamma(ParamState& state, const VectorXd& resid_ss, int n,
                 const Hyperparams& hp, RngStream& rng) {
    const int p = state.p(), q = state.q();
    for (int j = 1; j <= q; ++j) {
        double shape = 0.5 * n + p / state.alpha_b + hp.a;
        double rate = 0.5 * resid_ss(j - 1) + hp.b;
        for (int k = 0; k < p; ++k)
            rate += 0.5 * state.Lambda(k, j - 1) *
                    std::pow(std::abs(state.B(k, j - 1)), state.alpha_b);
        if (j >= 2) {
            shape += (j - 1) / state.alpha_d;
            const auto& delta_j = state.delta[j - 2];
            const auto& tau_j = state.tau[j - 2];
            for (int k = 0; k < j - 1; ++k)
                rate += 0.5 * tau_j(k) * std::pow(std::abs(delta_j(k)), state.alpha_d);
        }
        state.gamma(j - 1) = rng.inverse_gamma(shape, rate);
    }
}

void gibbs_gamma(ParamState& state, const Dataset& data, const Hyperparams& hp,
                 RngStream& rng) {
    gibbs_gamma(state, sequential_residual_ss(state, data), data.n(), hp, rng);
}

VectorXd sequential_residual_ss(const ParamState& state, const Dataset& data) {
    const int q = data.q();
    const MatrixXd resid = data.Y - data.X * state.B;
    VectorXd ss(q);
    for (int j = 1; j <= q; ++j) {
        VectorXd f = resid.col(j - 1);
        if (j >= 2) f.noalias() -= resid.leftCols(j - 1) * state.delta[j - 2];
        ss(j - 1) = f.squaredNorm();
    }
    return ss;
}

double alpha_b_log_kernel(const ParamState& state, double alpha) {
    const int p = state.p(), q = state.q();
    const double inv_a = 1.0 / alpha;
    double sum_log = 0.0, sum_pen = 0.0;
    for (int j = 0; j < q; ++j) {
        const double g = state.gamma(j);
        for (int k = 0; k < p; ++k) {
            sum_log += std::log(state.Lambda(k, j)) - std::log(g);
            sum_pen += state.Lambda(k, j) / g * std::pow(std::abs(state.B(k, j)), alpha);
        }
    }
    return p * q * (std::log(alpha) - inv_a * std::log(2.0) - std::lgamma(inv_a)) +
           inv_a * sum_log - 0.5 * sum_pen;
}

double alpha_d_log_kernel(const ParamState& state, double alpha) {
    const int q = state.q();
    const double inv_a = 1.0 / alpha;
    double count = 0.0, sum_log = 0.0, sum_pen = 0.0;
    for (int j = 2; j <= q; ++j) {
        const double g = state.gamma(j - 1);
        count += j - 1;
        for (int k = 0; k < j - 1; ++k) {
            sum_log += std::log(state.tau[j - 2](k)) - std::log(g);
            sum_pen += state.tau[j - 2](k) / g *
                       std::pow(std::abs(state.delta[j - 2](k)), alpha);
        }
    }
    return count * (std::log(alpha) - inv_a * std::log(2.0) - std::lgamma(inv_a)) +
           inv_a * sum_log - 0.5 * sum_pen;
}

namespace {

template <typename Kernel>
bool mh_alpha_update(double& alpha, double step, const Hyperparams& hp,
                     double upper_cap, Kernel&& kernel, RngStream& rng) {
    const double proposal = alpha + step * rng.normal();
    if (proposal < hp.k1 || proposal > hp.k2 || proposal >= upper_cap) return false;
    const double diff = kernel(proposal) - kernel(alpha);
    if (std::log(rng.u01()) < diff) {
        alpha = proposal;
        return true;
    }
    return false;
}

}  // namespace

bool mh_alpha_b(ParamState& state, const Hyperparams& hp, MhControl& ctl,
                RngStream& rng, bool adapting, long long t) {
    ++ctl.alpha_b_proposals;
    const bool accepted = mh_alpha_update(
        state.alpha_b, ctl.step_alpha_b, hp, ctl.upper_cap,
        [&](double a) { return alpha_b_log_kernel(state, a); }, rng);
    if (accepted) ++ctl.alpha_b_accepts;
    if (adapting)
        ctl.step_alpha_b =
            robbins_monro_step(ctl.step_alpha_b, accepted, ctl.target_accept, t);
    return accepted;
}

bool mh_alpha_d(ParamState& state, const Hyperparams& hp, MhControl& ctl,
                RngStream& rng, bool adapting, long long t) {
    ++ctl.alpha_d_proposals;
    const bool accepted = mh_alpha_update(
        state.alpha_d, ctl.step_alpha_d, hp, ctl.upper_cap,
        [&](double a) { return alpha_d_log_kernel(state, a); }, rng);
    if (accepted) ++ctl.alpha_d_accepts;
    if (adapting)
        ctl.step_alpha_d =
            robbins_monro_step(ctl.step_alpha_d, accepted, ctl.target_accept, t);
    return accepted;
}

}  // namespace gmcb
