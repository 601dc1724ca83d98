#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace peacegrid {

// Seeded RNG with a sequence we own end to end. The standard library's
// shuffle and distributions are implementation-defined, which would break
// the byte-identical-reports guarantee across toolchains.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound) without modulo bias.
    std::uint64_t bounded(std::uint64_t bound) {
        const std::uint64_t limit = ~0ull - ~0ull % bound;
        std::uint64_t r;
        do {
            r = next();
        } while (r >= limit);
        return r % bound;
    }

    // Uniform in [0, 1), 53 bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller, second value cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 == 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// SplitMix64 finalizer as a standalone mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Fisher-Yates; with m < v.size() only the first m slots end up shuffled,
// which is all a without-replacement sample needs.
template <typename T>
void partial_shuffle(std::vector<T>& v, std::size_t m, SplitMix64& rng) {
    const std::size_t n = v.size();
    if (m > n) m = n;
    for (std::size_t i = 0; i < m && n - i > 1; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        using std::swap;
        swap(v[i], v[j]);
    }
}

}  // namespace peacegrid
