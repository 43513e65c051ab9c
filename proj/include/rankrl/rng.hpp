#pragma once

#include <cstdint>
#include <random>

namespace rankrl {

using Rng = std::mt19937_64;

// Deterministic stream splitting: derive independent sub-seeds from one
// experiment seed without coupling the consumers' draw counts.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double uniform_real(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Uniform integer in [0, n).
inline int uniform_index(Rng& rng, int n) {
    return std::uniform_int_distribution<int>(0, n - 1)(rng);
}

// True with probability eps. Consumes no randomness when eps <= 0 so that
// greedy rollouts are rng-free.
inline bool coinflip(double eps, Rng& rng) {
    if (eps <= 0.0) return false;
    return uniform_real(rng) < eps;
}

}  // namespace rankrl
