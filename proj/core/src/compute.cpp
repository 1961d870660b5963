// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/compute.hpp"

#include <cmath>

#include "moviebench/digest.hpp"

namespace moviebench {

namespace {
// One mixing step is roughly a nanosecond of ALU work on commodity cores.
constexpr double kOpsPerNs = 1.0;

inline uint64_t rotl64(uint64_t x, int r) { return (x << r) | (x >> (64 - r)); }
}  // namespace

uint64_t synthetic_compute_iterations(size_t payload_size, double cost_ns_per_byte,
                                      double slowdown) {
  if (payload_size == 0 || cost_ns_per_byte <= 0.0 || slowdown <= 0.0) return 0;
  double target_ns = static_cast<double>(payload_size) * cost_ns_per_byte / slowdown;
  double iters = target_ns * kOpsPerNs;
  if (iters < 0) return 0;
  if (iters > 1e15) iters = 1e15;
  return static_cast<uint64_t>(iters);
}

uint64_t synthetic_compute(std::string_view payload, double cost_ns_per_byte, double slowdown) {
  uint64_t h = fnv1a64(payload.substr(0, payload.size() < 64 ? payload.size() : 64));
  uint64_t iters = synthetic_compute_iterations(payload.size(), cost_ns_per_byte, slowdown);
  if (iters == 0) return h;

  // Word view of the payload; tail bytes fold into the last word.
  size_t words = payload.size() / 8;
  const auto* p = reinterpret_cast<const unsigned char*>(payload.data());
  uint64_t tail = 0;
  for (size_t i = words * 8; i < payload.size(); i++) tail = (tail << 8) | p[i];

  size_t wi = 0;
  for (uint64_t i = 0; i < iters; i++) {
    uint64_t w;
    if (words == 0) {
      w = tail;
    } else {
      uint64_t v;
      __builtin_memcpy(&v, p + wi * 8, 8);
      w = v;
      if (++wi >= words) wi = 0;
    }
    h ^= w + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h = rotl64(h, 27) * 0x9e3779b97f4a7c15ull;
  }
  return h;
}

}  // namespace moviebench
