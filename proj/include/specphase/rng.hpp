#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace specphase {

using Engine = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stream seed h(base, i0, i1, ...). Sample k of grid point j gets
/// derive_seed(base, {j, k}); the result does not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> path) noexcept;

Engine make_engine(std::uint64_t seed);

// The helpers below are written out instead of using <random>
// distributions so that sampled graphs are identical across standard
// library implementations.

/// Uniform integer in [0, bound). bound must be positive.
std::uint64_t uniform_below(Engine& rng, std::uint64_t bound);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Engine& rng);

template <class T>
void shuffle(std::span<T> items, Engine& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = uniform_below(rng, i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace specphase
