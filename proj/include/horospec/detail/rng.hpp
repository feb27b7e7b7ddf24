#pragma once

#include <cstdint>
#include <random>

namespace horospec::detail {

// splitmix64, used to derive independent child seeds from (seed, index)
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG. The engine is the standardized mt19937_64; all variate
// conversions are done by hand so that output streams are bit-identical
// across standard libraries (std::uniform_real_distribution is not portable).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t index(std::uint64_t n) {
        // multiply-shift; bias is negligible for the n used here (n << 2^64)
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * n) >> 64);
    }

    // child generator for sample i, independent of draw order
    static Rng child(std::uint64_t seed, std::uint64_t i) {
        return Rng(splitmix64(seed ^ splitmix64(i + 0x9e3779b97f4a7c15ULL)));
    }

private:
    std::mt19937_64 eng_;
};

} // namespace horospec::detail
