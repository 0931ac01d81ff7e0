#pragma once

#include <array>
#include <cstdint>
#include <cmath>
#include <span>
#include <vector>

namespace cdaug {

/// splitmix64 step; advances the state and returns the next output.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Deterministic 64-bit hash of two values, used to derive sub-stream seeds.
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s ^= b + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return splitmix64(s);
}

/// Seeded pseudo-random generator with a fixed, platform-independent
/// algorithm: xoshiro256** state-seeded via splitmix64, normals via
/// Box-Muller, bounded integers via 128-bit multiply-shift. The same
/// seed yields the same draw sequence everywhere; no std::*_distribution
/// is used anywhere in the library.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [0, bound). bound must be nonzero.
    std::uint64_t uniform_int(std::uint64_t bound) noexcept {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    /// One standard-normal draw (Box-Muller, cosine branch).
    double normal() noexcept {
        double z0, z1;
        normal_pair(z0, z1);
        return z0;
    }

    /// Fills `out` with N(mean, stddev^2) draws, consuming one uniform
    /// pair per two outputs.
    void fill_normal(std::span<double> out, double mean, double stddev) noexcept {
        std::size_t i = 0;
        while (i + 1 < out.size()) {
            double z0, z1;
            normal_pair(z0, z1);
            out[i] = mean + stddev * z0;
            out[i + 1] = mean + stddev * z1;
            i += 2;
        }
        if (i < out.size()) {
            double z0, z1;
            normal_pair(z0, z1);
            out[i] = mean + stddev * z0;
        }
    }

    /// k distinct indices drawn from [0, n), in draw order (partial
    /// Fisher-Yates). Requires k <= n.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_int(n - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

    /// Independent generator for sub-stream `stream`, derived from the
    /// original seed only, so split order never matters.
    SeededRng split(std::uint64_t stream) const noexcept {
        return SeededRng(mix64(seed_, stream));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    void normal_pair(double& z0, double& z1) noexcept {
        // Guard against log(0); uniform() can return exactly 0.
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        z0 = r * std::cos(theta);
        z1 = r * std::sin(theta);
    }

    std::array<std::uint64_t, 4> state_;
    std::uint64_t seed_;
};

} // namespace cdaug
