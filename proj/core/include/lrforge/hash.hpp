#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lrforge {

// 64-bit FNV-1a. Stable across platforms, used wherever a hash ends up in a
// file or decides an output.
constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t s = x;
  return splitmix64(s);
}

std::string hex64(std::uint64_t value);

// Hex digest of a whole file's bytes (FNV-1a 64). Throws Errc::io.
std::string file_digest(const std::string& path);

}  // namespace lrforge
