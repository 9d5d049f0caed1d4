#pragma once

#include <functional>
#include <optional>

#include "gmcb/chain.hpp"
#include "gmcb/conditionals.hpp"
#include "gmcb/model.hpp"
#include "gmcb/rng.hpp"
#include "gmcb/sampler_mh.hpp"  // UpdateKind, SamplerControl

namespace gmcb {

// Latent precision scales of the scale-mixture representation. Regenerated at
// the top of every sweep and discarded; never stored in the chain output.
struct LatentScales {
    MatrixXd omega;                 // p x q
    std::vector<VectorXd> epsilon;  // ragged, lengths 1..q-1
};

// GMCB-SMN: data augmentation with exponentially tilted stable latents and
// exact multivariate normal block draws for B and each delta_j, in the order
// omega -> B -> Lambda -> alpha_b -> epsilon -> delta -> tau -> gamma ->
// alpha_d. Requires k2 = 2.
class GmcbSmnSampler {
public:
    GmcbSmnSampler(const Dataset& data, const Hyperparams& hp,
                   const SamplerControl& ctl, std::uint64_t seed);

    void sweep(bool adapting);
    ChainOutput run(long long iterations, long long burn_in, long long thin);

    const ParamState& state() const { return state_; }
    void set_state(const ParamState& state);
    void set_response(const MatrixXd& y);

    // individual block draws, exposed for the distributional oracles
    void draw_omega();
    void draw_epsilon();
    void draw_b_block();
    void draw_delta_block(int j);  // j in 2..q

    const LatentScales& latents() const { return latents_; }
    RngStream& rng() { return rng_; }
    bool uses_svd_path() const { return use_svd_path_; }
    // test hook: force the B draw onto the structured path on p < n data
    void force_structured_b(bool on);

    std::function<void(UpdateKind)> trace;

private:
    void rebuild_response_caches();
    void rebuild_residual_caches();
    VectorXd delta_diag() const;              // pq prior precision diagonal
    VectorXd psi_diag(int j) const;           // j-1 prior precision diagonal
    VectorXd sequential_ss_from_cross() const;

    Dataset data_;
    Hyperparams hp_;
    SamplerControl ctl_;
    ParamState state_;
    LatentScales latents_;
    MhControl alpha_ctl_;
    RngStream rng_;
    long long sweep_count_ = 0;
    bool use_svd_path_ = false;       // p >= n
    bool force_structured_b_ = false;
    bool keep_raw_resid_ = false;

    MatrixXd xtx_, xty_, yty_;  // fixed per response
    SvdCache svd_;              // p >= n only
    MatrixXd uty_;              // U'Y, p >= n only
    MatrixXd ete_;              // (Y - XB)'(Y - XB), refreshed after B draws
    MatrixXd raw_resid_;        // Y - XB, kept when n is small or q > n
    double x_checksum_ = 0.0;
};

ChainOutput run_gmcb_smn(const Dataset& data, const Hyperparams& hp,
                         const SamplerControl& ctl, long long iterations,
                         long long burn_in, long long thin, std::uint64_t seed);

}  // namespace gmcb
