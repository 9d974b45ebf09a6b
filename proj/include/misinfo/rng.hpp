#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace misinfo {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the label bytes.
constexpr std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the sub-stream identified by (root, label, indices).
///
/// Every random consumer in the library draws from a stream derived this way,
/// so results depend only on the root seed and the logical position of the
/// task, never on scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                                    std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t h = splitmix64(root ^ hash_label(label));
  for (std::uint64_t i : indices) h = splitmix64(h ^ splitmix64(i + 1));
  return h;
}

inline Rng make_stream(std::uint64_t root, std::string_view label,
                       std::initializer_list<std::uint64_t> indices = {}) {
  return Rng(derive_seed(root, label, indices));
}

}  // namespace misinfo
