// genworld/noise.hpp
//
// Seeded 2D gradient noise (improved-Perlin construction: permutation table,
// quintic fade 6t^5 - 15t^4 + 10t^3) and fractal Brownian motion on top of it.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <algorithm>

#include "genworld/core.hpp"

namespace genworld::noise {

class Perlin2 {
public:
    explicit Perlin2(std::uint64_t seed) : seed_(seed) {
        std::array<std::uint8_t, 256> base{};
        for (int i = 0; i < 256; ++i) base[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
        Rng rng(mix64(seed ^ 0x9e3779b97f4a7c15ull));
        for (std::size_t i = 255; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)));
            std::swap(base[i], base[j]);
        }
        for (std::size_t i = 0; i < 512; ++i) perm_[i] = base[i & 255];
    }

    std::uint64_t seed() const { return seed_; }

    // Value in [-1, 1]; exactly 0 on integer lattice points.
    double operator()(double x, double y) const {
        const double fx = std::floor(x);
        const double fy = std::floor(y);
        const int xi = static_cast<int>(static_cast<std::int64_t>(fx) & 255);
        const int yi = static_cast<int>(static_cast<std::int64_t>(fy) & 255);
        const double dx = x - fx;
        const double dy = y - fy;
        const double u = fade(dx);
        const double v = fade(dy);

        const int aa = perm_[perm_[xi] + yi];
        const int ab = perm_[perm_[xi] + yi + 1];
        const int ba = perm_[perm_[xi + 1] + yi];
        const int bb = perm_[perm_[xi + 1] + yi + 1];

        const double x1 = lerp(u, grad(aa, dx, dy), grad(ba, dx - 1, dy));
        const double x2 = lerp(u, grad(ab, dx, dy - 1), grad(bb, dx - 1, dy - 1));
        return std::clamp(lerp(v, x1, x2), -1.0, 1.0);
    }

    static double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

private:
    static double lerp(double t, double a, double b) { return a + t * (b - a); }

    // Eight directions of length sqrt(2); with that length the 2D value range is [-1, 1].
    static double grad(int hash, double x, double y) {
        constexpr double r2 = 1.4142135623730951;
        switch (hash & 7) {
            case 0: return x + y;
            case 1: return -x + y;
            case 2: return x - y;
            case 3: return -x - y;
            case 4: return r2 * x;
            case 5: return -r2 * x;
            case 6: return r2 * y;
            default: return -r2 * y;
        }
    }

    std::uint64_t seed_;
    std::array<int, 512> perm_{};
};

// Free-function form; caches the permutation of the most recent seed per thread.
inline double perlin2(std::uint64_t seed, double x, double y) {
    thread_local std::optional<Perlin2> cached;
    if (!cached || cached->seed() != seed) cached.emplace(seed);
    return (*cached)(x, y);
}

struct FbmParams {
    int octaves = 4;
    double persistence = 0.5;
    double lacunarity = 2.0;
};

inline void check(const FbmParams& p) {
    if (p.octaves < 1 || !(p.persistence > 0 && p.persistence < 1) || !(p.lacunarity > 1))
        throw Error(Errc::InvalidParams, "gaia", "fbm requires octaves >= 1, 0 < persistence < 1, lacunarity > 1");
}

// Sum of octaves divided by the sum of their amplitudes, so the result stays in [-1, 1].
inline double fbm(const Perlin2& noise, double x, double y, const FbmParams& p) {
    check(p);
    double sum = 0;
    double norm = 0;
    double amp = 1;
    double freq = 1;
    for (int i = 0; i < p.octaves; ++i) {
        sum += amp * noise(x * freq, y * freq);
        norm += amp;
        amp *= p.persistence;
        freq *= p.lacunarity;
    }
    return std::clamp(sum / norm, -1.0, 1.0);
}

inline double fbm(std::uint64_t seed, double x, double y, int octaves, double persistence, double lacunarity) {
    FbmParams p{octaves, persistence, lacunarity};
    check(p);
    thread_local std::optional<Perlin2> cached;
    if (!cached || cached->seed() != seed) cached.emplace(seed);
    return fbm(*cached, x, y, p);
}

}  // namespace genworld::noise
