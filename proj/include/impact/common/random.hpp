#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace impact {

/// splitmix64 mix of (base, stream); independent sub-seeds for runs.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform draw in [0, bound) by rejection; identical on every platform,
/// unlike std::uniform_int_distribution.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound);

/// Fisher-Yates permutation of 0..n-1 under seed.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

template <class T>
void seeded_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace impact
