#pragma once

#include <limits>

#include "gmcb/model.hpp"
#include "gmcb/rng.hpp"

namespace gmcb {

// Random-walk controls for the alpha updates, shared by both samplers. Step
// sizes adapt toward target_accept during burn-in only and are frozen after.
struct MhControl {
    double step_alpha_b = 0.1;
    double step_alpha_d = 0.1;
    bool adapt = true;
    double target_accept = 0.44;
    // proposals at or above this value are rejected outright (the SMN sampler
    // caps alpha strictly below 2 so the stable index stays inside (0,1))
    double upper_cap = std::numeric_limits<double>::infinity();

    long long alpha_b_proposals = 0, alpha_b_accepts = 0;
    long long alpha_d_proposals = 0, alpha_d_accepts = 0;

    void validate() const;
};

// One Robbins-Monro scaling step on a log step size.
double robbins_monro_step(double step, bool accepted, double target, long long t);

// Gibbs update for every lambda_{kj}: two-component gamma mixture with
// shapes e_i + 1/alpha_b, rates f_i + |B_{kj}|^{alpha_b}/(2 gamma_j), and
// weights computed in log space.
void gibbs_lambda(ParamState& state, const Hyperparams& hp, RngStream& rng);

// Same update for every tau_{j,k} using (s_i, t_i), delta and alpha_d.
void gibbs_tau(ParamState& state, const Hyperparams& hp, RngStream& rng);

// Gibbs update for gamma given the per-column residual sums of squares
// ||Y^j - X B^j - W_j delta_j||^2. The conditional kernel is inverse-gamma;
// each gamma_j is drawn as 1/Gamma(shape_j, rate_j).
void gibbs_gamma(ParamState& state, const VectorXd& resid_ss, int n,
                 const Hyperparams& hp, RngStream& rng);
// Convenience overload that computes the residual sums from the data.
void gibbs_gamma(ParamState& state, const Dataset& data, const Hyperparams& hp,
                 RngStream& rng);

// Conditional log kernels for the penalty exponents (support indicator not
// included; callers check the range).
double alpha_b_log_kernel(const ParamState& state, double alpha);
double alpha_d_log_kernel(const ParamState& state, double alpha);

// Random-walk Metropolis-Hastings updates; return whether the proposal was
// accepted. Out-of-range proposals are rejected, keeping the kernel
// reversible under the truncated uniform prior.
bool mh_alpha_b(ParamState& state, const Hyperparams& hp, MhControl& ctl,
                RngStream& rng, bool adapting, long long t);
bool mh_alpha_d(ParamState& state, const Hyperparams& hp, MhControl& ctl,
                RngStream& rng, bool adapting, long long t);

// Per-column residual sums of squares in the autoregression form, used by
// gibbs_gamma and by tests.
VectorXd sequential_residual_ss(const ParamState& state, const Dataset& data);

}  // namespace gmcb
