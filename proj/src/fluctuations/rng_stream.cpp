#include "src/fluctuations/rng_stream.h"

#include "src/core/hash.h"

#include <cmath>

namespace fluctuations {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed) : RngStream(core::mix64(master_seed ^ 0x6d61737465722121ull), true) {}

RngStream::RngStream(std::uint64_t key, bool) : key_(key) {
    // Seed xoshiro256** state from the key with a SplitMix64 walk.
    std::uint64_t x = key;
    for (auto& word : s_) {
        x += 0x9e3779b97f4a7c15ull;
        word = core::mix64(x);
    }
    // xoshiro must not start in the all-zero state.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[3] = 1;
}

RngStream RngStream::child(std::string_view label, std::uint64_t index) const {
    std::uint64_t k = key_;
    k ^= core::fnv1a64(label) + 0x9e3779b97f4a7c15ull + (k << 6) + (k >> 2);
    k = core::mix64(k ^ core::mix64(index + 1));
    return RngStream(k, true);
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::normal01() {
    // Box-Muller, cosine branch only. u1 is shifted into (0,1] so the log is
    // finite.
    const double u1 = 1.0 - uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

} // namespace fluctuations
