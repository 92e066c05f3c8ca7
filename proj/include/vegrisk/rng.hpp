#pragma once

#include <cstdint>
#include <string_view>

namespace vegrisk {

/// Derives an independent seed for a named pipeline stage from the root seed,
/// so adding a stage never shifts the random stream of another.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::string_view stage) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (char c : stage) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t z = root ^ h;  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vegrisk
