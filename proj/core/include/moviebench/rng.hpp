// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "moviebench/digest.hpp"

namespace moviebench {

// Deterministic PRNG used everywhere reproducibility matters (dataset
// generation, load schedules). std::random distributions are not pinned by
// the standard, so distributions are derived here by hand.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  // Uniform in [0, 1) with 53 bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi] inclusive.
  uint64_t uniform(uint64_t lo, uint64_t hi) {
    if (hi <= lo) return lo;
    return lo + next_u64() % (hi - lo + 1);
  }

  // Exponential with given mean.
  double exponential(double mean) {
    double u = next_double();
    if (u >= 1.0) u = 0.9999999999999999;
    return -std::log(1.0 - u) * mean;
  }

  // Standard normal, Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    if (u1 < 1e-300) u1 = 1e-300;
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Log-normal with given median and sigma in log space.
  double lognormal(double median, double sigma) { return median * std::exp(sigma * normal()); }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Zipf over {1..n} with exponent s, sampled by inverse CDF on a precomputed
// table (n is small everywhere this is used).
class ZipfSampler {
 public:
  ZipfSampler(uint32_t n, double s) : cdf_(n) {
    double sum = 0.0;
    for (uint32_t k = 1; k <= n; k++) sum += 1.0 / std::pow(static_cast<double>(k), s);
    double acc = 0.0;
    for (uint32_t k = 1; k <= n; k++) {
      acc += 1.0 / std::pow(static_cast<double>(k), s) / sum;
      cdf_[k - 1] = acc;
    }
    cdf_.back() = 1.0;
  }

  uint32_t sample(Rng& rng) const {
    double u = rng.next_double();
    uint32_t lo = 0, hi = static_cast<uint32_t>(cdf_.size() - 1);
    while (lo < hi) {
      uint32_t mid = (lo + hi) / 2;
      if (cdf_[mid] < u) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    return lo + 1;
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace moviebench
