// Counter-style seeded random streams with a labeled lineage.
//
// A stream is identified by the master seed plus the chain of (label, index)
// pairs used to derive it. Identical lineage gives an identical draw
// sequence, independent of thread scheduling and of how sibling streams are
// consumed. This is what makes ensembles reproducible and parallelizable
// without coupling draw order across workers.
#pragma once

#include <cstdint>
#include <string_view>

namespace fluctuations {

class RngStream {
  public:
    explicit RngStream(std::uint64_t master_seed);

    // Derive an independent child stream; (label, index) extends the lineage.
    // Deriving the same child twice yields identical sequences.
    RngStream child(std::string_view label, std::uint64_t index = 0) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1).
    double uniform01();

    // Standard normal via Box-Muller; consumes two uniforms per draw.
    double normal01();

    std::uint64_t key() const { return key_; }

  private:
    RngStream(std::uint64_t key, bool derived_tag);

    std::uint64_t key_;  // lineage fingerprint
    std::uint64_t s_[4]; // xoshiro256** state
};

} // namespace fluctuations
