#include "gmcb/gbr.hpp"

#include <cmath>

#include "gmcb/errors.hpp"
#include "gmcb/quadrature.hpp"

namespace gmcb {

namespace {

// inner integral over beta for fixed alpha, written in t = beta - y
double beta_integral(double y, double alpha, double e, double f) {
    const double expo = e + 1.0 / alpha;
    auto integrand = [&](double t) {
        return std::exp(-0.5 * t * t) /
               std::pow(0.5 * std::pow(std::abs(t + y), alpha) + f, expo);
    };
    const double lo = -12.0, hi = 12.0;
    quad::Tolerance tol{1e-12, 1e-9};
    // |t+y|^alpha has a kink at t = -y; split there so each panel is smooth
    if (-y > lo && -y < hi)
        return quad::integrate(integrand, lo, -y, tol) +
               quad::integrate(integrand, -y, hi, tol);
    return quad::integrate(integrand, lo, hi, tol);
}

}  // namespace

double gbr_marginal_logm(double y, const GbrUnivariateParams& hp) {
    if (!(hp.e > 0.0) || !(hp.f > 0.0) || !(hp.k1 > 0.0) || !(hp.k2 > hp.k1))
        throw ConfigError("gbr_marginal_logm: invalid hyperparameters");
    auto outer = [&](double alpha) {
        const double inv_a = 1.0 / alpha;
        const double c = std::log(alpha) - (inv_a + 1.0) * std::log(2.0) -
                         std::lgamma(inv_a) + hp.e * std::log(hp.f) -
                         std::lgamma(hp.e) + std::lgamma(hp.e + inv_a);
        return std::exp(c) * beta_integral(y, alpha, hp.e, hp.f);
    };
    const double v = quad::integrate(outer, hp.k1, hp.k2, {1e-10, 1e-8});
    if (!(v > 0.0)) throw NumericError("gbr_marginal_logm: marginal is not positive");
    // 1/sqrt(2 pi) from the likelihood and 1/(k2-k1) from the alpha prior
    return std::log(v) - 0.5 * std::log(2.0 * 3.14159265358979323846) -
           std::log(hp.k2 - hp.k1);
}

double gbr_marginal_shift(double y, const GbrUnivariateParams& hp) {
    const double h = 1e-4 * std::max(1.0, std::abs(y));
    return (gbr_marginal_logm(y + h, hp) - gbr_marginal_logm(y - h, hp)) / (2.0 * h);
}

}  // namespace gmcb
