#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace smsotp {

/// Deterministic random source. Every randomized path in the project draws
/// from one of these, so a whole run is reproducible from its seed.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Unbiased draw from [0, n). Rejection sampling instead of
    /// std::uniform_int_distribution, whose output is implementation-defined;
    /// mt19937_64 itself is pinned by the standard, so the stream is stable.
    std::uint64_t below(std::uint64_t n);

    std::string hex64();   // 16 hex chars
    std::string hex128();  // 32 hex chars

private:
    std::mt19937_64 engine_;
};

} // namespace smsotp
