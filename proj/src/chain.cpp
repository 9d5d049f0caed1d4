#include "gmcb/chain.hpp"

namespace gmcb {

MatrixXd ChainOutput::b_at(long long s) const {
    const VectorXd row = b_samples.row(s);
    return Eigen::Map<const MatrixXd>(row.data(), p, q);
}

std::vector<VectorXd> ChainOutput::delta_at(long long s) const {
    std::vector<VectorXd> out;
    int offset = 0;
    for (int j = 2; j <= q; ++j) {
        out.push_back(delta_samples.row(s).segment(offset, j - 1).transpose());
        offset += j - 1;
    }
    return out;
}

long long retained_sample_count(long long iterations, long long burn_in,
                                long long thin) {
    return (iterations - burn_in - 1) / thin + 1;
}

void allocate_samples(ChainOutput& out, long long total) {
    out.b_samples.resize(total, out.p * out.q);
    out.delta_samples.resize(total, out.delta_len());
    out.gamma_samples.resize(total, out.q);
    out.alpha_b_samples.resize(total);
    out.alpha_d_samples.resize(total);
}

void record_state(ChainOutput& out, const ParamState& state, long long row) {
    out.b_samples.row(row) =
        Eigen::Map<const VectorXd>(state.B.data(), out.p * out.q).transpose();
    int offset = 0;
    for (int j = 2; j <= out.q; ++j) {
        out.delta_samples.row(row).segment(offset, j - 1) =
            state.delta[j - 2].transpose();
        offset += j - 1;
    }
    out.gamma_samples.row(row) = state.gamma.transpose();
    out.alpha_b_samples(row) = state.alpha_b;
    out.alpha_d_samples(row) = state.alpha_d;
}

}  // namespace gmcb
