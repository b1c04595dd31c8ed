#include "panelsde/rng.hpp"

#include <cmath>

namespace panelsde {

namespace {

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

// splitmix64 finalizer: bijective mixing of a 64-bit word.
uint64_t mix64(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(uint64_t master_seed, uint64_t stream_id)
    : master_seed_(master_seed),
      stream_id_(stream_id),
      key_(mix64(master_seed) ^ mix64(stream_id * kGamma + 0x6a09e667f3bcc909ULL)) {}

RngStream RngStream::derive(uint64_t sub_id) const {
    // Fold the parent stream id into the seed so (seed, id, sub_id) chains
    // stay distinct from sibling streams.
    return RngStream(mix64(master_seed_ + mix64(stream_id_)), sub_id);
}

uint64_t RngStream::next_u64() { return mix64(key_ + (++counter_) * kGamma); }

double RngStream::uniform() {
    // Top 53 bits, shifted into (0, 1].
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double RngStream::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace panelsde
