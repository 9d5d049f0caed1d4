#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmcb/linalg.hpp"

namespace gmcb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Columnwise transform applied before fitting, recorded so estimates can be
// mapped back to the original scale.
struct Preprocessing {
    bool centered = false;
    bool standardized = false;
    VectorXd y_center;  // q, zeros when not centered
    VectorXd x_center;  // p, zeros when not standardized
    VectorXd x_scale;   // p, ones when not standardized (population sd)
};

struct Dataset {
    MatrixXd Y;  // n x q responses
    MatrixXd X;  // n x p covariates
    Preprocessing transform;

    int n() const { return static_cast<int>(Y.rows()); }
    int p() const { return static_cast<int>(X.cols()); }
    int q() const { return static_cast<int>(Y.cols()); }

    void validate() const;
};

// Center Y columns and/or standardize X columns (population 1/n sd), with the
// transform recorded on the result.
Dataset preprocess(const MatrixXd& y, const MatrixXd& x, bool center_y,
                   bool standardize_x);

struct GammaMixturePrior {
    double e1, f1, e2, f2;  // shape/rate pairs, equal component weights
};

struct Hyperparams {
    double k1 = 0.5;  // in (0,1]
    double k2 = 2.0;  // >= 2
    GammaMixturePrior lambda_mix{1.0, 1.0, 40.0, 0.5};
    GammaMixturePrior tau_mix{1.0, 1.0, 40.0, 0.5};
    double a = 3.0, b = 2.0;  // inverse-gamma prior on each gamma_j

    void validate() const;
};

// One MCMC state. delta[j-2] holds delta_j (length j-1) for j = 2..q; tau is
// ragged the same way.
struct ParamState {
    MatrixXd B;       // p x q
    MatrixXd Lambda;  // p x q, positive
    double alpha_b = 1.0;
    std::vector<VectorXd> delta;
    std::vector<VectorXd> tau;
    VectorXd gamma;  // q, positive
    double alpha_d = 1.0;

    int p() const { return static_cast<int>(B.rows()); }
    int q() const { return static_cast<int>(B.cols()); }
    void validate(const Hyperparams& hp) const;
};

// Modified Cholesky view Omega = T' diag(Dinv) T with T unit lower triangular,
// T_{j,k} = -delta_{j,k} for k < j.
struct CholeskyView {
    MatrixXd T;      // q x q
    VectorXd Dinv;   // q
    MatrixXd Omega;  // q x q SPD
};

CholeskyView build_cholesky_view(const std::vector<VectorXd>& delta,
                                 const VectorXd& gamma);
MatrixXd build_t_matrix(const std::vector<VectorXd>& delta, int q);

// SVD cache X = U C V' with the diagonal of singular values in the leading
// r x r block of C; reused across sweeps because it depends only on X.
struct SvdCache {
    MatrixXd U;  // n x n
    MatrixXd V;  // p x p
    MatrixXd C;  // n x p
    int rank = 0;

    void validate(const MatrixXd& x) const;
};
SvdCache make_svd_cache(const MatrixXd& x);

// Sum over columns of log N(Y^j; X B^j + W_j delta_j, gamma_j I_n), including
// the -nq/2 log(2 pi) constant so it equals the matrix-normal log likelihood.
double sequential_loglik(const ParamState& state, const Dataset& data);

// Log of the joint posterior kernel up to one fixed additive constant. All
// alpha-dependent normalizers are kept; returns -inf outside the support.
double log_posterior_kernel(const ParamState& state, const Dataset& data,
                            const Hyperparams& hp);

// Shared starting point for both samplers: ridge B, Pourahmadi sequential fit
// for delta, floored sequential residual variances for gamma, midpoint alphas.
// Lambda and tau start at one; the first sweep replaces them before use.
ParamState make_initial_state(const Dataset& data, const Hyperparams& hp);

// Empirical inverse-gamma prior for the gamma_j from sequential autoregression
// residual variances, matching mean and variance. Falls back to (3, 2 mean)
// when the variances are degenerate.
struct MomGammaPrior {
    double a = 0.0;
    double b = 0.0;
    bool fallback = false;
};
MomGammaPrior method_of_moments_gamma_prior(const Dataset& data);

}  // namespace gmcb
