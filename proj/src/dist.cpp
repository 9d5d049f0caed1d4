#include "gmcb/dist.hpp"

#include <cmath>
#include <limits>

#include "gmcb/errors.hpp"
#include "gmcb/linalg.hpp"

namespace gmcb {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr long long kMaxRejectionIters = 1'000'000;

double sinc(double x) {
    const double ax = std::abs(x);
    if (ax < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
    }
    return std::sin(x) / x;
}

// B(x) = sinc(x) / (sinc(a x)^a * sinc((1-a) x)^(1-a)), with B(0) = 1.
double stable_b(double x, double a) {
    const double ia = 1.0 - a;
    return sinc(x) / (std::pow(sinc(a * x), a) * std::pow(sinc(ia * x), ia));
}

// Zolotarev's function A(x) = sin(a x)^a sin((1-a) x)^(1-a) / sin(x).
double zolotarev_a(double x, double a) {
    const double ia = 1.0 - a;
    return std::pow(a * sinc(a * x), a) * std::pow(ia * sinc(ia * x), ia) / sinc(x);
}

// Untilted positive stable via Kanter's representation.
double sample_positive_stable(double alpha, RngStream& rng) {
    const double b = (1.0 - alpha) / alpha;
    const double u = kPi * rng.u01();
    const double e = rng.exponential();
    const double a = std::pow(zolotarev_a(u, alpha), 1.0 / (1.0 - alpha));
    return std::pow(a / e, b);
}

}  // namespace

double sample_tilted_stable(const TiltedStableParams& params, RngStream& rng) {
    const double alpha = params.stability;
    const double tilt = params.tilt;
    if (!(alpha > 0.0) || !(alpha < 1.0))
        throw ConfigError("tilted stable: stability must lie in (0,1)");
    if (!(tilt >= 0.0) || !std::isfinite(tilt))
        throw ConfigError("tilted stable: tilt must be finite and nonnegative");

    const double lambda_alpha = std::pow(tilt, alpha);
    if (lambda_alpha == 0.0) return sample_positive_stable(alpha, rng);

    // Devroye (2009), double rejection.
    const double b = (1.0 - alpha) / alpha;
    const double gam = lambda_alpha * alpha * (1.0 - alpha);
    const double sgam = std::sqrt(gam);
    const double c1 = std::sqrt(kPi / 2.0);
    const double c2 = 2.0 + c1;
    const double c3 = c2 * sgam;
    const double xi = (1.0 + std::sqrt(2.0) * c3) / kPi;
    const double psi = c3 * std::exp(-gam * kPi * kPi / 8.0) / std::sqrt(kPi);
    const double w1 = c1 * xi / sgam;
    const double w2 = 2.0 * std::sqrt(kPi) * psi;
    const double w3 = xi * kPi;

    long long iters = 0;
    for (;;) {
        double u_angle, z, big_z;
        // First stage: sample the angle from the dominating mixture and accept
        // against the exact ratio.
        for (;;) {
            if (++iters > kMaxRejectionIters)
                throw SamplerError("tilted stable: rejection cap exceeded");
            const double v = rng.u01();
            if (gam >= 1.0) {
                if (v < w1 / (w1 + w2)) {
                    u_angle = std::abs(rng.normal()) / sgam;
                } else {
                    const double w = rng.u01();
                    u_angle = kPi * (1.0 - w * w);
                }
            } else {
                const double w = rng.u01();
                u_angle = (v < w3 / (w2 + w3)) ? kPi * w : kPi * (1.0 - w * w);
            }
            const double w_unif = rng.u01();
            const double zeta = std::sqrt(stable_b(u_angle, alpha));
            z = 1.0 / (1.0 - std::pow(1.0 + alpha * zeta / sgam, -1.0 / alpha));
            double rho = kPi * std::exp(-lambda_alpha * (1.0 - 1.0 / (zeta * zeta))) /
                         ((1.0 + c1) * sgam / zeta + z);
            double d = 0.0;
            if (u_angle >= 0.0 && gam >= 1.0) d += xi * std::exp(-gam * u_angle * u_angle / 2.0);
            if (u_angle > 0.0 && u_angle < kPi) d += psi / std::sqrt(kPi - u_angle);
            if (u_angle >= 0.0 && u_angle <= kPi && gam < 1.0) d += xi;
            rho *= d;
            big_z = w_unif * rho;
            if (u_angle < kPi && big_z <= 1.0) break;
        }

        // Second stage: sample X from the three-piece envelope around the mode.
        const double a = std::pow(zolotarev_a(u_angle, alpha), 1.0 / (1.0 - alpha));
        const double m = std::pow(b / a, alpha) * lambda_alpha;
        const double del = std::sqrt(m * alpha / a);
        const double a1 = del * c1;
        const double a2 = del;
        const double a3 = z / a;
        const double s = a1 + a2 + a3;
        const double v2 = rng.u01();
        double x, n_draw = 0.0, e_draw = 0.0;
        if (v2 < a1 / s) {
            n_draw = rng.normal();
            x = m - del * std::abs(n_draw);
        } else if (v2 < (a1 + a2) / s) {
            x = m + del * rng.u01();
        } else {
            e_draw = rng.exponential();
            x = m + del + e_draw * a3;
        }
        if (!(x >= 0.0)) continue;

        const double e_total = -std::log(big_z);
        const double lambda = std::pow(lambda_alpha, 1.0 / alpha);
        double c = a * (x - m) + lambda * (std::pow(x, -b) - std::pow(m, -b));
        if (x < m)
            c -= n_draw * n_draw / 2.0;
        else if (x > m + del)
            c -= e_draw;
        if (c <= e_total) return std::pow(x, -b);
        if (++iters > kMaxRejectionIters)
            throw SamplerError("tilted stable: rejection cap exceeded");
    }
}

double exp_power_logdensity(double x, double lam, double alpha, double gam) {
    if (!(lam > 0.0) || !(gam > 0.0) || !(alpha > 0.0))
        throw ConfigError("exp_power_logdensity: parameters must be positive");
    const double inv_a = 1.0 / alpha;
    return std::log(alpha) + inv_a * std::log(lam) - (inv_a + 1.0) * std::log(2.0) -
           inv_a * std::log(gam) - std::lgamma(inv_a) -
           (lam / (2.0 * gam)) * std::pow(std::abs(x), alpha);
}

double sample_exp_power(double lam, double alpha, double gam, RngStream& rng) {
    if (!(lam > 0.0) || !(gam > 0.0) || !(alpha > 0.0))
        throw ConfigError("sample_exp_power: parameters must be positive");
    const double g = rng.gamma(1.0 / alpha, 1.0);
    const double mag = std::pow(2.0 * gam * g / lam, 1.0 / alpha);
    return rng.bernoulli(0.5) ? mag : -mag;
}

double sample_two_component_gamma(double logw1, double shape1, double rate1,
                                  double logw2, double shape2, double rate2,
                                  RngStream& rng) {
    double p1;
    if (logw1 == -std::numeric_limits<double>::infinity()) {
        p1 = 0.0;
    } else if (logw2 == -std::numeric_limits<double>::infinity()) {
        p1 = 1.0;
    } else {
        const double m = std::max(logw1, logw2);
        const double e1 = std::exp(logw1 - m);
        const double e2 = std::exp(logw2 - m);
        p1 = e1 / (e1 + e2);
    }
    return rng.bernoulli(p1) ? rng.gamma(shape1, rate1) : rng.gamma(shape2, rate2);
}

VectorXd sample_gaussian_by_precision(const GaussianByPrecision& spec, RngStream& rng) {
    const auto m = spec.precision.rows();
    if (spec.shift.size() != m)
        throw ConfigError("gaussian_by_precision: shift/precision dimensions disagree");
    const MatrixXd q = linalg::symmetrize_checked(spec.precision);
    const MatrixXd lower = linalg::chol(q);
    // mean = Q^{-1} h via the factor
    VectorXd v = lower.triangularView<Eigen::Lower>().solve(spec.shift);
    VectorXd mean = lower.transpose().triangularView<Eigen::Upper>().solve(v);
    VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z(i) = rng.normal();
    VectorXd noise = lower.transpose().triangularView<Eigen::Upper>().solve(z);
    return mean + noise;
}

VectorXd sample_gaussian_structured(const StructuredGaussianSpec& spec, RngStream& rng) {
    const auto m = spec.prior_cov_factor.rows();
    const auto k = spec.prior_cov_factor.cols();
    const auto d = spec.data_map.rows();
    if (spec.data_map.cols() != m || spec.rhs.size() != d)
        throw ConfigError("gaussian_structured: dimensions do not conform");

    VectorXd z1(k), z2(d);
    for (Eigen::Index i = 0; i < k; ++i) z1(i) = rng.normal();
    for (Eigen::Index i = 0; i < d; ++i) z2(i) = rng.normal();

    const VectorXd u = spec.prior_cov_factor * z1;
    const VectorXd v = spec.data_map * u + z2;
    const MatrixXd g = spec.data_map * spec.prior_cov_factor;  // d x k
    MatrixXd capacitance = g * g.transpose();
    capacitance.diagonal().array() += 1.0;
    Eigen::LLT<MatrixXd> llt(capacitance);
    auto& stats = linalg::chol_stats();
    stats.max_dim = std::max<int>(stats.max_dim, static_cast<int>(d));
    ++stats.count;
    if (llt.info() != Eigen::Success)
        throw SingularSystemError("gaussian_structured: capacitance solve failed");
    const VectorXd w = llt.solve(spec.rhs - v);
    if (!w.allFinite())
        throw SingularSystemError("gaussian_structured: solve produced non-finite values");
    return u + spec.prior_cov_factor * (g.transpose() * w);
}

}  // namespace gmcb
