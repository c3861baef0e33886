#include "smsotp/rng.hpp"

#include <cstdio>
#include <stdexcept>

namespace smsotp {

std::uint64_t SeededRng::below(std::uint64_t n) {
    if (n == 0) {
        throw std::invalid_argument("SeededRng::below: n must be positive");
    }
    // Reject draws from the final partial block of size 2^64 mod n.
    const std::uint64_t remainder = (0 - n) % n;
    for (;;) {
        const std::uint64_t x = engine_();
        if (x <= UINT64_MAX - remainder) {
            return x % n;
        }
    }
}

std::string SeededRng::hex64() {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(engine_()));
    return buf;
}

std::string SeededRng::hex128() {
    return hex64() + hex64();
}

} // namespace smsotp
