#include "gmcb/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "gmcb/errors.hpp"

namespace gmcb::quad {

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 Tolerance tol) {
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, lo, hi, 18, tol.relative, &error);
    if (!std::isfinite(value))
        throw IntegrationError("quadrature produced a non-finite value", error);
    const double allowed = std::max(tol.absolute, tol.relative * std::abs(value));
    if (error > allowed * 10.0)
        throw IntegrationError("quadrature did not converge", error);
    return value;
}

}  // namespace gmcb::quad
