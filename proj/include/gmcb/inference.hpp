#pragma once

#include "gmcb/chain.hpp"
#include "gmcb/model.hpp"

namespace gmcb {

// Elementwise equal-tailed interval bounds.
struct IntervalPair {
    MatrixXd lower;
    MatrixXd upper;
};

// Bayes point estimates under both loss pairs plus elementwise credible
// intervals. Omega_F is the posterior mean of Omega; Omega_S inverts the
// posterior mean of Omega^{-1}; B_Q reweights B by Omega.
struct EstimateBundle {
    MatrixXd b_f, omega_f;  // squared Frobenius loss pair
    MatrixXd b_q, omega_s;  // scalar quadratic / Stein loss pair
    IntervalPair ci_b, ci_omega;
    double ci_level = 0.95;
};

EstimateBundle bayes_estimates(const ChainOutput& chain, double ci_level = 0.95);

// Map estimates fitted on centered/standardized data back to the original
// covariate scale. Omega is unaffected by the transform.
EstimateBundle map_to_original_scale(const EstimateBundle& est,
                                     const Preprocessing& transform);

struct LossValues {
    double frob_b = 0.0;
    double frob_omega = 0.0;
    double l_q = 0.0;  // tr((B~ - B) Omega (B~ - B)')
    double l_s = 0.0;  // tr(Om~ Om^-1) - log|Om~ Om^-1| - q
};
LossValues losses(const MatrixXd& b_est, const MatrixXd& omega_est,
                  const MatrixXd& b_truth, const MatrixXd& omega_truth);

// Equal-tailed empirical quantile intervals for every element of B and of the
// reconstructed Omega.
struct CredibleIntervals {
    IntervalPair b;
    IntervalPair omega;
    double level = 0.95;
};
CredibleIntervals credible_intervals(const ChainOutput& chain, double level);

// 0/1 hit indicators of truth against the intervals.
MatrixXd coverage_indicators(const IntervalPair& ci, const MatrixXd& truth);

// Multivariate effective sample size S (det Lambda / det Sigma)^{1/d} with
// batch-means long-run covariance, batch size floor(sqrt(S)).
struct MessResult {
    double value = 0.0;
    bool warned = false;       // short chain or repaired covariance
    std::string note;
};
MessResult multivariate_ess(const MatrixXd& series);
// Default parameter selection: all B entries plus the distinct entries of
// Omega (lower triangle including the diagonal).
MessResult multivariate_ess(const ChainOutput& chain);
MatrixXd mess_default_series(const ChainOutput& chain);

// Maximum likelihood baseline: B = (X'X)^{-1} X'Y, Omega the inverse of the
// n-divisor residual covariance.
struct MleFit {
    MatrixXd B;
    MatrixXd Omega;
};
MleFit mle(const Dataset& data);

}  // namespace gmcb
