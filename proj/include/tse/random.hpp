#pragma once

#include <cstdint>
#include <random>

namespace tse {

/// Independent random streams derived from one root seed. Draws use only the
/// raw 64-bit engine output, so sequences are identical across standard
/// library implementations.
enum class Stream : std::uint32_t {
    init = 1,
    observations = 2,
    collocation = 3,
    noise = 4,
};

class Rng {
public:
    Rng(std::uint64_t root_seed, Stream stream);

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n), unbiased.
    std::uint64_t index(std::uint64_t n);
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace tse
