#pragma once

#include <Eigen/Dense>

#include "gmcb/rng.hpp"

namespace gmcb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Exponentially tilted positive stable law: density proportional to
// exp(-tilt * w) * p_stability(w), where p_a is the positive stable density
// with Laplace transform exp(-s^a), 0 < a < 1.
struct TiltedStableParams {
    double stability;  // in (0,1)
    double tilt;       // >= 0, finite
};

// Devroye (2009) double-rejection sampler; expected iterations are uniformly
// bounded over all tilts. A hard cap of 1e6 attempts turns numerical
// pathologies into SamplerError instead of a hang.
double sample_tilted_stable(const TiltedStableParams& params, RngStream& rng);

// log of the exponential power density
//   (a lam^{1/a}) / (2^{1/a+1} gam^{1/a} Gamma(1/a)) * exp{-(lam/(2 gam)) |x|^a}
double exp_power_logdensity(double x, double lam, double alpha, double gam);

// Draw from the exponential power density above via |X|^a * lam/(2 gam) ~ Gamma(1/a, 1).
double sample_exp_power(double lam, double alpha, double gam, RngStream& rng);

// Two-component gamma mixture with log-space weights (safe under extreme
// imbalance; a weight of -inf degenerates to the other component).
double sample_two_component_gamma(double logw1, double shape1, double rate1,
                                  double logw2, double shape2, double rate2,
                                  RngStream& rng);

// Gaussian with density kernel exp{-x'Qx/2 + h'x}: one Cholesky of Q, a solve
// pair for the mean, one triangular solve for the noise (Rue 2001).
struct GaussianByPrecision {
    VectorXd shift;      // h
    MatrixXd precision;  // Q, symmetric positive definite
};
VectorXd sample_gaussian_by_precision(const GaussianByPrecision& spec, RngStream& rng);

// Same target expressed through its parts, for the case where the Gaussian
// dimension m exceeds the number of data rows d (Bhattacharya et al. 2016):
//   precision Q = data_map' data_map + (prior_cov_factor prior_cov_factor')^{-1}
//   shift     h = data_map' rhs
// Cost is O(d m^2); the only factorization is d x d.
struct StructuredGaussianSpec {
    MatrixXd prior_cov_factor;  // P (m x m), prior covariance = P P'
    MatrixXd data_map;          // Phi (d x m)
    VectorXd rhs;               // alpha (d)
};
VectorXd sample_gaussian_structured(const StructuredGaussianSpec& spec, RngStream& rng);

}  // namespace gmcb
