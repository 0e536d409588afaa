// Copyright 2026 The codesign Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CODESIGN_RNG_HPP_
#define CODESIGN_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace codesign {

using Rng = std::mt19937_64;

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

// Seed of the named sub-stream `stream` (e.g. "cma", "env") of a root seed,
// further split by up to two indices. Streams never depend on call order, so
// any process topology reproduces the same numbers.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stream,
                                    std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = detail::splitmix64(root ^ detail::fnv1a(stream));
  h = detail::splitmix64(h ^ a);
  return detail::splitmix64(h ^ (b * 0x9e3779b97f4a7c15ULL));
}

inline Rng make_rng(std::uint64_t root, std::string_view stream,
                    std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(root, stream, a, b));
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  return normal(rng);
}

}  // namespace codesign

#endif  // CODESIGN_RNG_HPP_
