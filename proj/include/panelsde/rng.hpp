#pragma once

#include <cstdint>

namespace panelsde {

// Counter-based pseudo-random stream. A stream is fully identified by
// (master_seed, stream_id): the n-th draw is a pure function of those plus n,
// so the sequence is reproducible regardless of call site or thread
// scheduling. Instances are cheap to construct and single-consumer.
//
// Generation uses a splitmix64-style finalizer over key + counter; normals
// come from Box-Muller, consuming two uniforms per call (no caching, so the
// draw count stays in lockstep with the counter).
class RngStream {
public:
    explicit RngStream(uint64_t master_seed, uint64_t stream_id = 0);

    // Independent stream for a sub-task (e.g. one path of an ensemble).
    RngStream derive(uint64_t sub_id) const;

    uint64_t next_u64();
    // Uniform on (0, 1]; never returns 0 so log(u) is always finite.
    double uniform();
    // Standard normal via Box-Muller.
    double normal();

    uint64_t master_seed() const { return master_seed_; }
    uint64_t stream_id() const { return stream_id_; }

private:
    uint64_t master_seed_;
    uint64_t stream_id_;
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace panelsde
