#pragma once

#include <cstdint>
#include <vector>

namespace gmcb {

// Seeded random stream. Streams are identified by (seed, stream id); substreams
// derive new independent streams deterministically, so replication r of an
// experiment always sees the same draws no matter how runs are scheduled.
//
// Core generator is xoshiro256++ with splitmix64 state initialization. All
// distribution samplers below are implemented here rather than taken from
// <random> so that draw sequences do not depend on the standard library build.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

    // Independent stream derived from this stream's identity (not its state).
    RngStream substream(std::uint64_t index) const;

    std::uint64_t next_u64();

    // Uniform on (0,1), 53-bit mantissa, never exactly 0 or 1.
    double u01();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    double normal();                      // standard normal (polar method)
    double exponential();                 // rate 1
    double gamma(double shape, double rate);
    double inverse_gamma(double shape, double rate);
    bool bernoulli(double prob);

    // Fisher-Yates choice of k distinct indices from [0, n).
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::uint64_t state_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t seed_, stream_;
};

}  // namespace gmcb
