#pragma once

#include <functional>

namespace gmcb::quad {

struct Tolerance {
    double absolute = 1e-10;
    double relative = 1e-8;
};

// Adaptive Gauss-Kronrod integration of f over [lo, hi].
// Throws IntegrationError when the error estimate misses the tolerance.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 Tolerance tol = {});

}  // namespace gmcb::quad
