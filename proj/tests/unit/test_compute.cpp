// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <algorithm>

#include "doctest.h"
#include "moviebench/common.hpp"
#include "moviebench/compute.hpp"

namespace mb = moviebench;

namespace {

// Median-of-5 timing to ride out scheduler noise.
uint64_t timed_ns(const std::string& payload, double cost, double slowdown) {
  std::vector<uint64_t> samples;
  for (int i = 0; i < 5; i++) {
    uint64_t t0 = mb::mono_now_ns();
    volatile uint64_t digest = mb::synthetic_compute(payload, cost, slowdown);
    (void)digest;
    samples.push_back(mb::mono_now_ns() - t0);
  }
  std::sort(samples.begin(), samples.end());
  return samples[2];
}

}  // namespace

TEST_CASE("digest is deterministic and payload-sensitive") {
  std::string payload(4096, 'q');
  uint64_t a = mb::synthetic_compute(payload, 20.0, 1.0);
  uint64_t b = mb::synthetic_compute(payload, 20.0, 1.0);
  CHECK_EQ(a, b);
  payload[100] = 'r';
  CHECK_NE(mb::synthetic_compute(payload, 20.0, 1.0), a);
}

TEST_CASE("empty payload returns fast") {
  uint64_t t0 = mb::mono_now_ns();
  volatile uint64_t digest = mb::synthetic_compute("", 1000.0, 1.0);
  (void)digest;
  CHECK_LT(mb::mono_now_ns() - t0, 10000);  // < 10 us
}

TEST_CASE("iteration count is a pure function of the arguments") {
  CHECK_EQ(mb::synthetic_compute_iterations(1000, 10.0, 1.0),
           mb::synthetic_compute_iterations(1000, 10.0, 1.0));
  CHECK_EQ(mb::synthetic_compute_iterations(1000, 10.0, 0.5),
           2 * mb::synthetic_compute_iterations(1000, 10.0, 1.0));
  CHECK_EQ(mb::synthetic_compute_iterations(2000, 10.0, 1.0),
           2 * mb::synthetic_compute_iterations(1000, 10.0, 1.0));
  CHECK_EQ(mb::synthetic_compute_iterations(0, 10.0, 1.0), 0);
}

TEST_CASE("slowdown 0.5 doubles duration within 20%") {
  std::string payload(64 * 1024, 'z');
  uint64_t nominal = timed_ns(payload, 40.0, 1.0);
  uint64_t slowed = timed_ns(payload, 40.0, 0.5);
  double ratio = static_cast<double>(slowed) / static_cast<double>(nominal);
  CHECK_GT(ratio, 1.6);
  CHECK_LT(ratio, 2.4);
}

TEST_CASE("duration scales linearly in payload size within 20%") {
  std::string small(32 * 1024, 'z');
  std::string large(128 * 1024, 'z');
  uint64_t t_small = timed_ns(small, 40.0, 1.0);
  uint64_t t_large = timed_ns(large, 40.0, 1.0);
  double ratio = static_cast<double>(t_large) / static_cast<double>(t_small);
  CHECK_GT(ratio, 3.2);
  CHECK_LT(ratio, 4.8);
}
