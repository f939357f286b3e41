#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace ncarl::rng {

// Unbiased draw from [0, bound). std::uniform_int_distribution is
// implementation-defined, so rejection sampling on the raw engine keeps
// seeded runs reproducible across standard libraries.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t draw = 0;
  std::uint64_t rem = 0;
  do {
    draw = gen();
    rem = draw % bound;
  } while (draw - rem > max - (bound - 1));
  return rem;
}

// First `count` elements of a seeded Fisher-Yates shuffle of {0, ..., n-1}.
inline std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t count,
                                                            std::mt19937_64& gen) {
  std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (std::int64_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::int64_t>(bounded(gen, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

inline std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t count,
                                                            std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  return sample_without_replacement(n, count, gen);
}

}  // namespace ncarl::rng
