#pragma once

#include <cstdint>

namespace poipred {

// Philox4x32-10 block function. Counter-based: every 128-bit counter maps to
// four independent 32-bit outputs under a 64-bit key, so draws are addressable
// by (seed, stream, block) and reproducible across platforms and thread
// schedules.
void philox4x32(const std::uint32_t counter[4], const std::uint32_t key[2],
                std::uint32_t out[4]);

// One logical random stream. Streams with distinct (stream, domain) pairs are
// statistically independent under the same seed.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t domain = 0);

    // uniform double in the open interval (0,1), 53 usable bits
    double next_double();

    std::uint32_t next_u32();

private:
    void refill();

    std::uint32_t key_[2];
    std::uint32_t stream_lo_, stream_hi_, domain_;
    std::uint32_t block_ = 0;
    std::uint32_t buf_[4];
    int pos_ = 4;
};

// Poisson draw: sequential inversion below mean 10, Hormann's PTRS transformed
// rejection above. Consumes a variable number of uniforms from the stream.
int poisson_sample(RngStream& rng, double mean);

}  // namespace poipred
