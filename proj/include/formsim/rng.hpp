#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace formsim {

/// splitmix64. Small, fast, and the output sequence for a given seed is fixed
/// by the algorithm itself, so trajectories replay bit-identically on any
/// platform with IEEE doubles.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1]: top 53 bits, shifted off zero.
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Standard normals via Box-Muller, one variate per call. Consumes exactly two
/// generator outputs per variate; nothing is cached, so the draw count is a
/// pure function of the call count.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : gen_(seed) {}

    double next() {
        const double u1 = gen_.next_unit();
        const double u2 = gen_.next_unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    SplitMix64 gen_;
};

}  // namespace formsim
