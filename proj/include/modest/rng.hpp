#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "modest/types.hpp"

namespace modest {

namespace detail {

/// splitmix64 finalizer. Raw consecutive seeds leave mt19937_64 streams
/// correlated enough to bias Monte-Carlo means by ~1%; hashing the seed
/// decorrelates them while staying a pure function of the seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic random stream. All draws are derived from raw mt19937_64
/// output through fixed arithmetic, so sequences are identical across
/// platforms and standard-library implementations (std::*_distribution gives
/// no such guarantee).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(detail::mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Modulo bias is below 2^-53 for the sizes
    /// used here (n is at most a few thousand).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(engine_() % static_cast<std::uint64_t>(n));
    }

    /// Inverse-CDF draw from a probability row using a single uniform.
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform01();
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return i;
        }
        return probs.empty() ? 0 : probs.size() - 1;
    }

    /// Uniform (flat) Dirichlet sample of dimension k, via normalized Exp(1).
    NumVec dirichlet_uniform(std::size_t k) {
        NumVec x(k);
        double sum = 0.0;
        for (auto& xi : x) {
            double u = uniform01();
            if (u <= 0.0) u = 0x1.0p-53;
            xi = -std::log(u);
            sum += xi;
        }
        for (auto& xi : x) xi /= sum;
        return x;
    }

    /// k distinct indices from [0, n), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + uniform_index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace modest
