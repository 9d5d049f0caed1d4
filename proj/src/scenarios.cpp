#include "gmcb/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "gmcb/errors.hpp"
#include "gmcb/sampler_smn.hpp"

namespace gmcb {

namespace {

MatrixXd ar1_covariance(int p, double rho) {
    MatrixXd s(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
    return s;
}

MatrixXd draw_covariates(int n, int p, RngStream& rng) {
    const MatrixXd l = linalg::chol(ar1_covariance(p, 0.7));
    MatrixXd z(n, p);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < p; ++k) z(i, k) = rng.normal();
    return z * l.transpose();
}

// noise with rows ~ N_q(0, Sigma) generated through the autoregression form
MatrixXd draw_noise(int n, const GroundTruth& truth, RngStream& rng) {
    const int q = static_cast<int>(truth.gamma.size());
    MatrixXd e(n, q);
    for (int j = 1; j <= q; ++j) {
        const double sd = std::sqrt(truth.gamma(j - 1));
        for (int i = 0; i < n; ++i) e(i, j - 1) = sd * rng.normal();
        if (j >= 2) e.col(j - 1).noalias() += e.leftCols(j - 1) * truth.delta[j - 2];
    }
    return e;
}

void finish_truth_from_factors(GroundTruth& truth) {
    const CholeskyView view = build_cholesky_view(truth.delta, truth.gamma);
    truth.Omega = view.Omega;
    Eigen::LLT<MatrixXd> llt(truth.Omega);
    if (llt.info() != Eigen::Success)
        throw NumericError("scenario truth: Omega is not positive definite");
    truth.Sigma = llt.solve(MatrixXd::Identity(truth.Omega.rows(), truth.Omega.cols()));
    truth.Sigma = 0.5 * (truth.Sigma + truth.Sigma.transpose());
}

void finish_truth_from_precision(GroundTruth& truth) {
    Eigen::LLT<MatrixXd> llt(truth.Omega);
    if (llt.info() != Eigen::Success)
        throw NumericError("scenario truth: Omega is not positive definite");
    truth.Sigma = llt.solve(MatrixXd::Identity(truth.Omega.rows(), truth.Omega.cols()));
    truth.Sigma = 0.5 * (truth.Sigma + truth.Sigma.transpose());
    auto mc = linalg::modified_cholesky_of_covariance(truth.Sigma);
    truth.delta = std::move(mc.delta);
    truth.gamma = std::move(mc.gamma);
}

void finish_truth_from_covariance(GroundTruth& truth) {
    auto mc = linalg::modified_cholesky_of_covariance(truth.Sigma);
    truth.delta = std::move(mc.delta);
    truth.gamma = std::move(mc.gamma);
    const CholeskyView view = build_cholesky_view(truth.delta, truth.gamma);
    truth.Omega = view.Omega;
}

GroundTruth truth_scenario_1(int p, int q, RngStream& rng) {
    GroundTruth truth;
    truth.B.resize(p, q);
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < p; ++k) truth.B(k, j) = 2.0 + 0.001 * rng.normal();
    truth.gamma.resize(q);
    truth.gamma << 1.0, 0.51, 0.424, 0.388, 0.368;
    const double row_value[] = {0.7, 0.412, 0.292, 0.226};
    for (int j = 2; j <= q; ++j)
        truth.delta.push_back(VectorXd::Constant(j - 1, row_value[j - 2]));
    finish_truth_from_factors(truth);
    return truth;
}

GroundTruth truth_scenario_2(int p, int q, RngStream& rng) {
    GroundTruth truth;
    truth.B.resize(p, q);
    for (int j = 0; j < q; ++j)
        for (int k = 0; k < p; ++k) truth.B(k, j) = 5.0 + rng.normal();
    for (int idx : rng.sample_without_replacement(p * q, 12))
        truth.B(idx % p, idx / p) = 0.0;
    truth.gamma.resize(q);
    truth.gamma << 1.0, 0.51, 0.51, 0.51, 0.51;
    for (int j = 2; j <= q; ++j) {
        VectorXd d = VectorXd::Zero(j - 1);
        d(j - 2) = 0.7;
        truth.delta.push_back(d);
    }
    finish_truth_from_factors(truth);
    return truth;
}

GroundTruth truth_scenario_3(int p, int q, RngStream& rng) {
    GroundTruth truth;
    truth.B = MatrixXd::Zero(p, q);
    for (int idx : rng.sample_without_replacement(p * q, 3))
        truth.B(idx % p, idx / p) = 15.0 + 3.0 * rng.normal();
    truth.gamma.resize(q);
    truth.gamma << 0.5, 0.7, 1.0, 3.0, 5.0;
    for (int j = 2; j <= q; ++j) {
        VectorXd d = VectorXd::Zero(j - 1);
        for (int k = 1; k < j; ++k) {
            const int lag = j - k;
            if (lag == 1) d(k - 1) = 0.75 + 0.02 * k;
            else if (lag == 2) d(k - 1) = 0.4;
            else if (lag == 3) d(k - 1) = 0.2;
            else if (lag == 4) d(k - 1) = 0.1;
        }
        truth.delta.push_back(d);
    }
    finish_truth_from_factors(truth);
    return truth;
}

GroundTruth truth_scenario_4(int p, int q, RngStream& rng) {
    GroundTruth truth;
    truth.B = MatrixXd::Zero(p, q);
    const int nonzero = static_cast<int>(std::lround(0.05 * p * q));
    for (int idx : rng.sample_without_replacement(p * q, nonzero)) {
        const double mag = rng.uniform(0.5, 2.0);
        truth.B(idx % p, idx / p) = rng.bernoulli(0.5) ? mag : -mag;
    }
    for (int attempt = 0; attempt < 20; ++attempt) {
        // sixteen disjoint three-member cliques, unit diagonal
        truth.Omega = MatrixXd::Identity(q, q);
        const auto members = rng.sample_without_replacement(q, 48);
        for (int c = 0; c < 16; ++c)
            for (int a = 0; a < 3; ++a)
                for (int b = a + 1; b < 3; ++b) {
                    const int i = members[3 * c + a], j = members[3 * c + b];
                    truth.Omega(i, j) = truth.Omega(j, i) = 0.75;
                }
        Eigen::LLT<MatrixXd> llt(truth.Omega);
        if (llt.info() == Eigen::Success) {
            finish_truth_from_precision(truth);
            return truth;
        }
    }
    throw NumericError("scenario 4: clique precision assembly failed repeatedly");
}

GroundTruth truth_scenario_5(int p, int q, RngStream& rng) {
    GroundTruth truth;
    // sorted compound-symmetric normal mean
    VectorXd v(q);
    const double shared = rng.normal();
    for (int j = 0; j < q; ++j)
        v(j) = std::sqrt(0.5) * shared + std::sqrt(0.5) * rng.normal();
    std::sort(v.data(), v.data() + q);
    truth.B = v.transpose();

    truth.Sigma.resize(q, q);
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) {
            const double h = std::abs(i - j);
            truth.Sigma(i, j) = 0.5 * (std::pow(h + 1.0, 1.4) - 2.0 * std::pow(h, 1.4) +
                                       std::pow(std::abs(h - 1.0), 1.4));
        }
    finish_truth_from_covariance(truth);
    (void)p;
    return truth;
}

}  // namespace

void ScenarioSpec::resolve_defaults() {
    if (id >= 1 && id <= 3) {
        if (n == 0) n = 100;
        if (p == 0) p = 5;
        if (q == 0) q = 5;
    } else if (id == 4) {
        if (n == 0) n = 40;
        if (p == 0) p = 30;
        if (q == 0) q = 50;
    } else if (id == 5) {
        if (n == 0) n = 40;
        if (p == 0) p = 1;
        if (q == 0) q = 50;
    }
}

void ScenarioSpec::validate() const {
    if (id < 1 || id > 5) throw ConfigError("scenario: id must be 1..5");
    if (n < 2 || p < 1 || q < 1) throw ConfigError("scenario: dimensions must be positive");
    if (id <= 3 && q != 5)
        throw ConfigError("scenario " + std::to_string(id) + ": the published truth uses q = 5");
    if (id == 4 && q != 50)
        throw ConfigError("scenario 4: the clique truth uses q = 50");
    if (id == 5 && p != 1)
        throw ConfigError("scenario 5 is intercept-only (p = 1)");
    if (replications < 1) throw ConfigError("scenario: need at least one replication");
}

void GroundTruth::check() const {
    const int q = static_cast<int>(gamma.size());
    const double eye_err =
        (Omega * Sigma - MatrixXd::Identity(q, q)).cwiseAbs().maxCoeff();
    if (eye_err > 1e-8)
        throw NumericError("scenario truth: Omega Sigma deviates from identity");
    const CholeskyView view = build_cholesky_view(delta, gamma);
    const double fac_err = (view.Omega - Omega).cwiseAbs().maxCoeff();
    if (fac_err > 1e-10 * std::max(1.0, Omega.cwiseAbs().maxCoeff()))
        throw NumericError("scenario truth: factor reconstruction mismatch");
}

ScenarioDraw generate(const ScenarioSpec& spec_in, int rep) {
    ScenarioSpec spec = spec_in;
    spec.resolve_defaults();
    spec.validate();
    RngStream rng(spec.seed, 0x5EED0000ULL + static_cast<std::uint64_t>(rep));

    ScenarioDraw draw;
    switch (spec.id) {
        case 1: draw.truth = truth_scenario_1(spec.p, spec.q, rng); break;
        case 2: draw.truth = truth_scenario_2(spec.p, spec.q, rng); break;
        case 3: draw.truth = truth_scenario_3(spec.p, spec.q, rng); break;
        case 4: draw.truth = truth_scenario_4(spec.p, spec.q, rng); break;
        case 5: draw.truth = truth_scenario_5(spec.p, spec.q, rng); break;
        default: throw ConfigError("scenario: id must be 1..5");
    }
    draw.truth.check();

    draw.X = (spec.id == 5) ? MatrixXd::Ones(spec.n, 1)
                            : draw_covariates(spec.n, spec.p, rng);
    draw.Y = draw.X * draw.truth.B + draw_noise(spec.n, draw.truth, rng);
    return draw;
}

Hyperparams scenario_hyperparams(int scenario_id, Algorithm algo) {
    const GammaMixturePrior sparse_mix{0.1, 1.0, 2.0, 0.01};
    const GammaMixturePrior dense_mix{1.0, 1.0, 40.0, 0.5};
    Hyperparams hp;
    hp.k1 = 0.5;
    hp.k2 = (algo == Algorithm::SMN) ? 2.0 : 4.0;
    switch (scenario_id) {
        case 1: hp.lambda_mix = dense_mix; hp.tau_mix = dense_mix; break;
        case 2: hp.lambda_mix = sparse_mix; hp.tau_mix = sparse_mix; break;
        case 3: hp.lambda_mix = sparse_mix; hp.tau_mix = dense_mix; break;
        case 4: hp.lambda_mix = sparse_mix; hp.tau_mix = sparse_mix; break;
        case 5: hp.lambda_mix = dense_mix; hp.tau_mix = sparse_mix; break;
        default: throw ConfigError("scenario: id must be 1..5");
    }
    hp.a = 3.0;
    hp.b = 2.0;
    return hp;
}

ChainOutput fit_scenario_replication(const ScenarioDraw& draw, int scenario_id,
                                     const ExperimentConfig& cfg,
                                     std::uint64_t chain_seed) {
    const bool transform = scenario_id != 5;  // intercept-only stays raw
    Dataset data = preprocess(draw.Y, draw.X, transform, transform);

    Hyperparams hp = scenario_hyperparams(scenario_id, cfg.algorithm);
    if (data.n() > data.p() + data.q()) {
        const auto mom = method_of_moments_gamma_prior(data);
        hp.a = mom.a;
        hp.b = mom.b;
    }

    const long long burn = cfg.burn_in >= 0 ? cfg.burn_in : cfg.iterations / 10;
    if (cfg.algorithm == Algorithm::SMN)
        return run_gmcb_smn(data, hp, cfg.control, cfg.iterations, burn, cfg.thin,
                            chain_seed);
    return run_gmcb_mh(data, hp, cfg.control, cfg.iterations, burn, cfg.thin,
                       chain_seed);
}

namespace {

std::uint64_t chain_seed_for(std::uint64_t seed, int rep) {
    return RngStream(seed, 0xC4A15000ULL + static_cast<std::uint64_t>(rep)).next_u64();
}

void check_failure_budget(int failures, int reps, const std::string& first_error) {
    if (failures * 20 > reps)
        throw SamplerError("experiment: more than 5 percent of replications failed (" +
                           std::to_string(failures) + "/" + std::to_string(reps) +
                           "); first error: " + first_error);
}

// run `reps` independent replications, possibly across threads
void for_each_replication(int reps, int jobs,
                          const std::function<void(int)>& body) {
    if (jobs <= 1) {
        for (int r = 0; r < reps; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, reps);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= reps) return;
                body(r);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace

LossExperimentResult run_loss_experiment(const ScenarioSpec& spec_in,
                                         const ExperimentConfig& cfg) {
    ScenarioSpec spec = spec_in;
    spec.resolve_defaults();
    spec.validate();
    const int reps = spec.replications;

    LossExperimentResult result;
    result.per_rep_f.resize(reps);
    result.per_rep_qs.resize(reps);
    result.per_rep_mle.resize(reps);
    std::vector<char> ok(reps, 0);
    std::mutex err_mutex;
    std::string first_error;

    for_each_replication(reps, cfg.jobs, [&](int rep) {
        try {
            const ScenarioDraw draw = generate(spec, rep);
            ChainOutput chain = fit_scenario_replication(
                draw, spec.id, cfg, chain_seed_for(spec.seed, rep));
            EstimateBundle est = bayes_estimates(chain, cfg.ci_level);
            est = map_to_original_scale(est, chain.transform);
            result.per_rep_f[rep] =
                losses(est.b_f, est.omega_f, draw.truth.B, draw.truth.Omega);
            result.per_rep_qs[rep] =
                losses(est.b_q, est.omega_s, draw.truth.B, draw.truth.Omega);

            Dataset raw;
            raw.Y = draw.Y;
            raw.X = draw.X;
            const MleFit fit = mle(raw);
            result.per_rep_mle[rep] =
                losses(fit.B, fit.Omega, draw.truth.B, draw.truth.Omega);
            ok[rep] = 1;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (first_error.empty()) first_error = e.what();
        }
    });

    std::vector<LossValues> kept_f, kept_qs, kept_mle;
    for (int r = 0; r < reps; ++r) {
        if (!ok[r]) {
            ++result.failures;
            continue;
        }
        kept_f.push_back(result.per_rep_f[r]);
        kept_qs.push_back(result.per_rep_qs[r]);
        kept_mle.push_back(result.per_rep_mle[r]);
    }
    check_failure_budget(result.failures, reps, first_error);
    result.per_rep_f = kept_f;
    result.per_rep_qs = kept_qs;
    result.per_rep_mle = kept_mle;

    const std::string method =
        cfg.algorithm == Algorithm::SMN ? "gmcb-smn" : "gmcb-mh";
    auto emit = [&](const std::vector<LossValues>& values,
                    const std::string& method_name, const std::string& estimator) {
        const int m = static_cast<int>(values.size());
        auto cell = [&](const std::string& loss_name, auto getter) {
            double mean = 0.0;
            for (const auto& v : values) mean += getter(v);
            mean /= m;
            double var = 0.0;
            for (const auto& v : values) var += (getter(v) - mean) * (getter(v) - mean);
            var = m > 1 ? var / (m - 1) : 0.0;
            result.rows.push_back({spec.id, method_name, estimator, loss_name, mean,
                                   std::sqrt(var / m), m});
        };
        cell("frob_b", [](const LossValues& v) { return v.frob_b; });
        cell("frob_omega", [](const LossValues& v) { return v.frob_omega; });
        cell("l_q", [](const LossValues& v) { return v.l_q; });
        cell("l_s", [](const LossValues& v) { return v.l_s; });
    };
    emit(result.per_rep_f, method, "F");
    emit(result.per_rep_qs, method, "QS");
    emit(result.per_rep_mle, "mle", "mle");
    return result;
}

CoverageResult run_coverage_experiment(const ScenarioSpec& spec_in,
                                       const ExperimentConfig& cfg) {
    ScenarioSpec spec = spec_in;
    spec.resolve_defaults();
    spec.validate();
    const int reps = spec.replications;

    std::vector<double> b_cov(reps, -1.0), omega_cov(reps, -1.0);
    std::mutex err_mutex;
    std::string first_error;
    for_each_replication(reps, cfg.jobs, [&](int rep) {
        try {
            const ScenarioDraw draw = generate(spec, rep);
            ChainOutput chain = fit_scenario_replication(
                draw, spec.id, cfg, chain_seed_for(spec.seed, rep));
            EstimateBundle est = bayes_estimates(chain, cfg.ci_level);
            est = map_to_original_scale(est, chain.transform);
            b_cov[rep] = coverage_indicators(est.ci_b, draw.truth.B).mean();
            omega_cov[rep] = coverage_indicators(est.ci_omega, draw.truth.Omega).mean();
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (first_error.empty()) first_error = e.what();
        }
    });

    CoverageResult out;
    double sb = 0.0, so = 0.0;
    for (int r = 0; r < reps; ++r) {
        if (b_cov[r] < 0.0) {
            ++out.failures;
            continue;
        }
        sb += b_cov[r];
        so += omega_cov[r];
        ++out.reps;
    }
    check_failure_budget(out.failures, reps, first_error);
    out.b_coverage = sb / out.reps;
    out.omega_coverage = so / out.reps;
    return out;
}

std::string loss_rows_to_csv(const std::vector<LossRow>& rows) {
    std::ostringstream os;
    os << "scenario,method,estimator,loss,mean,stderr,reps\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.scenario << ',' << r.method << ',' << r.estimator << ','
           << r.loss_name << ',' << r.mean << ',' << r.stderr_ << ',' << r.reps
           << '\n';
    return os.str();
}

std::string coverage_to_csv(int scenario, const std::string& method,
                            const CoverageResult& result, double level) {
    std::ostringstream os;
    os << "scenario,method,parameter,level,coverage,reps\n";
    os.precision(10);
    os << scenario << ',' << method << ",B," << level << ',' << result.b_coverage
       << ',' << result.reps << '\n';
    os << scenario << ',' << method << ",Omega," << level << ','
       << result.omega_coverage << ',' << result.reps << '\n';
    return os.str();
}

}  // namespace gmcb
