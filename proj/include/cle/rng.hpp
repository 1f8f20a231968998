#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cle {

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the tag bytes, then mixed.
constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

// Seed of one stochastic stage. Replica seeds are stage_seed ^ replica.
constexpr std::uint64_t stage_seed(std::uint64_t base, std::string_view stage) noexcept {
  return mix64(base ^ hash_tag(stage));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::string_view stage,
                                    std::uint64_t replica) noexcept {
  return stage_seed(base, stage) ^ replica;
}

inline Engine make_engine(std::uint64_t seed) { return Engine(mix64(seed)); }

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1].
inline double uniform_open0(Engine& engine) {
  return (static_cast<double>(engine() >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace cle
