// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace moviebench {

// splitmix64 finalizer; a bijection on u64, so distinct inputs stay distinct.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < len; i++) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

// Stable 16-bit fold, used for deterministic per-service instance ids.
inline uint16_t fnv16(std::string_view s) {
  uint64_t h = fnv1a64(s);
  h ^= h >> 32;
  h ^= h >> 16;
  uint16_t v = static_cast<uint16_t>(h & 0xffff);
  return v == 0 ? 1 : v;
}

// CRC-32C (Castagnoli), table-driven. Guards store log records.
uint32_t crc32c(const void* data, size_t len, uint32_t crc = 0);
inline uint32_t crc32c(std::string_view s, uint32_t crc = 0) {
  return crc32c(s.data(), s.size(), crc);
}

}  // namespace moviebench
