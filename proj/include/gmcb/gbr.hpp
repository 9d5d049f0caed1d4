#pragma once

namespace gmcb {

// Univariate analog used for the tail-robustness numerics: Y|beta ~ N(beta,1),
// exponential power prior with lambda integrated out against an equal-component
// Gamma(e,f) mixture and alpha ~ Unif(k1,k2).
struct GbrUnivariateParams {
    double e = 1.0;
    double f = 1.0;
    double k1 = 0.5;
    double k2 = 2.0;
};

// log of the marginal density m(y), computed by nested adaptive quadrature
// over beta and alpha.
double gbr_marginal_logm(double y, const GbrUnivariateParams& hp);

// Posterior-mean shift E(beta|y) - y = d/dy log m(y), by centered differencing
// with step 1e-4 * max(1, |y|).
double gbr_marginal_shift(double y, const GbrUnivariateParams& hp);

}  // namespace gmcb
