#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "gmcb/model.hpp"

namespace gmcb {

struct AcceptanceSummary {
    double b_rate = 1.0;        // pooled over all B elements (1 for Gibbs draws)
    double delta_rate = 1.0;    // pooled over all delta elements
    double alpha_b_rate = 0.0;
    double alpha_d_rate = 0.0;
    long long b_proposals = 0, b_accepts = 0;
    long long delta_proposals = 0, delta_accepts = 0;
    long long alpha_b_proposals = 0, alpha_b_accepts = 0;
    long long alpha_d_proposals = 0, alpha_d_accepts = 0;
};

// Stored post-burn-in samples, one row per retained sweep. B rows are vec(B)
// in column-major order; delta rows concatenate delta_2, ..., delta_q.
struct ChainOutput {
    std::string algorithm;  // "mh" or "smn"
    int p = 0, q = 0;
    long long iterations = 0, burn_in = 0, thin = 0;
    std::uint64_t seed = 0;

    MatrixXd b_samples;       // S x pq
    MatrixXd delta_samples;   // S x q(q-1)/2
    MatrixXd gamma_samples;   // S x q
    VectorXd alpha_b_samples; // S
    VectorXd alpha_d_samples; // S

    AcceptanceSummary acceptance;
    MatrixXd frozen_step_b;                 // p x q (MH only)
    std::vector<VectorXd> frozen_step_delta;  // ragged (MH only)
    double frozen_step_alpha_b = 0.0, frozen_step_alpha_d = 0.0;
    int max_factorization_dim = 0;

    Preprocessing transform;  // copied from the dataset for back-mapping

    long long sample_count() const { return b_samples.rows(); }
    int delta_len() const { return q * (q - 1) / 2; }

    MatrixXd b_at(long long s) const;
    std::vector<VectorXd> delta_at(long long s) const;
};

long long retained_sample_count(long long iterations, long long burn_in,
                                long long thin);
void allocate_samples(ChainOutput& out, long long total);
void record_state(ChainOutput& out, const ParamState& state, long long row);

}  // namespace gmcb
