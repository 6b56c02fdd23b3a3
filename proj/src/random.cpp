#include "tse/random.hpp"

#include <cmath>
#include <numbers>

namespace tse {

Rng::Rng(std::uint64_t root_seed, Stream stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(root_seed & 0xffffffffu),
                      static_cast<std::uint32_t>(root_seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    engine_.seed(seq);
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::index(std::uint64_t n) {
    // Rejection keeps the draw exactly uniform.
    const std::uint64_t threshold = (std::uint64_t(0) - n) % n;
    std::uint64_t r;
    do {
        r = engine_();
    } while (r < threshold);
    return r % n;
}

double Rng::normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace tse
