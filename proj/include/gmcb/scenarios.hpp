#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmcb/inference.hpp"
#include "gmcb/model.hpp"
#include "gmcb/rng.hpp"
#include "gmcb/sampler_mh.hpp"

namespace gmcb {

struct ScenarioSpec {
    int id = 1;  // 1..5
    int n = 0, p = 0, q = 0;  // 0 means the scenario default
    std::uint64_t seed = 1;
    int replications = 1;

    void resolve_defaults();
    void validate() const;
};

struct GroundTruth {
    MatrixXd B;      // p x q
    MatrixXd Omega;  // q x q
    MatrixXd Sigma;  // q x q = Omega^{-1}
    std::vector<VectorXd> delta;
    VectorXd gamma;

    void check() const;  // Omega Sigma = I and Omega = T' D^{-1} T
};

// Raw (un-preprocessed) data plus exact truth for replication `rep`.
// Deterministic in (spec.seed, rep) via substreams.
struct ScenarioDraw {
    MatrixXd Y;
    MatrixXd X;
    GroundTruth truth;
};
ScenarioDraw generate(const ScenarioSpec& spec, int rep);

enum class Algorithm { MH, SMN };

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::SMN;
    long long iterations = 25000;
    // burn-in defaults to 10 percent of iterations when negative
    long long burn_in = -1;
    long long thin = 1;
    SamplerControl control;
    double ci_level = 0.95;
    int jobs = 1;
};

// Scenario-conventional hyperparameters: k1 = 0.5; k2 = 2 (SMN) or 4 (MH);
// regularization mixtures per scenario; method-of-moments gamma prior is
// applied per replication by the harness.
Hyperparams scenario_hyperparams(int scenario_id, Algorithm algo);

struct LossRow {
    int scenario = 0;
    std::string method;     // "gmcb-mh", "gmcb-smn", "mle"
    std::string estimator;  // "F", "QS" or "mle"
    std::string loss_name;  // "frob_b", "frob_omega", "l_q", "l_s"
    double mean = 0.0;
    double stderr_ = 0.0;
    int reps = 0;
};

struct LossExperimentResult {
    std::vector<LossRow> rows;
    // per-replication losses for paired comparisons: [rep] -> values
    std::vector<LossValues> per_rep_f;
    std::vector<LossValues> per_rep_qs;
    std::vector<LossValues> per_rep_mle;
    int failures = 0;
};

LossExperimentResult run_loss_experiment(const ScenarioSpec& spec,
                                         const ExperimentConfig& cfg);

struct CoverageResult {
    double b_coverage = 0.0;
    double omega_coverage = 0.0;
    int reps = 0;
    int failures = 0;
};
CoverageResult run_coverage_experiment(const ScenarioSpec& spec,
                                       const ExperimentConfig& cfg);

std::string loss_rows_to_csv(const std::vector<LossRow>& rows);
std::string coverage_to_csv(int scenario, const std::string& method,
                            const CoverageResult& result, double level);

// Shared by the harness and the CLI: preprocess raw scenario data, resolve the
// gamma prior by method of moments, and fit the requested sampler.
ChainOutput fit_scenario_replication(const ScenarioDraw& draw, int scenario_id,
                                     const ExperimentConfig& cfg,
                                     std::uint64_t chain_seed);

}  // namespace gmcb
