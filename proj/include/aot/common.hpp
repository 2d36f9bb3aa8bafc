#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aot {

// Validation failures (bad shapes, bad parameters) map to CLI exit code 2;
// everything else (I/O, corrupt files) maps to exit code 3.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Row-major count x dim matrix of doubles. The workhorse container for
// point clouds, noise batches and model outputs.
struct PointSet {
    std::size_t count = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    PointSet() = default;
    PointSet(std::size_t count_, std::size_t dim_)
        : count(count_), dim(dim_), values(count_ * dim_, 0.0) {}

    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * dim, dim};
    }
    std::span<double> row(std::size_t i) {
        return {values.data() + i * dim, dim};
    }
    bool same_shape(const PointSet& other) const {
        return count == other.count && dim == other.dim;
    }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        acc += diff * diff;
    }
    return acc;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// Deterministic, platform-independent RNG: xoshiro256++ seeded through
// splitmix64, normals via Box-Muller. std::normal_distribution is
// implementation-defined, which would break byte-identical replays.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return next_u64() % n;
    }

    double normal() {
        // Box-Muller; the spare cosine branch is discarded so the state
        // advances by exactly two words per draw.
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::sin(6.283185307179586476925286766559 * u2);
    }

    std::vector<double> normal_vector(std::size_t n) {
        std::vector<double> out(n);
        for (auto& x : out) x = normal();
        return out;
    }

    std::array<std::uint64_t, 4> state() const {
        return {state_[0], state_[1], state_[2], state_[3]};
    }
    void set_state(const std::array<std::uint64_t, 4>& s) {
        for (std::size_t i = 0; i < 4; ++i) state_[i] = s[i];
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

// Derives an independent seed for a named substream. Training keeps data
// draws, noise draws, sigma draws and augmentation on separate streams so
// that switching pairing mode perturbs nothing else.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
    std::uint64_t x = seed ^ (0xa0761d6478bd642fULL * (stream_id + 1));
    return Rng::splitmix64(x);
}

}  // namespace aot
