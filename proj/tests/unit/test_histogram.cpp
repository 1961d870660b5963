// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "moviebench/histogram.hpp"
#include "moviebench/rng.hpp"

namespace mb = moviebench;

namespace {

// Exact-sort nearest-rank oracle.
uint64_t exact_percentile(std::vector<uint64_t> v, double q) {
  std::sort(v.begin(), v.end());
  size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(v.size())));
  if (rank == 0) rank = 1;
  return v[rank - 1];
}

double rel_err(uint64_t a, uint64_t b) {
  return std::abs(static_cast<double>(a) - static_cast<double>(b)) / static_cast<double>(b);
}

}  // namespace

TEST_CASE("degenerate distribution: all samples equal") {
  mb::LatencyHistogram h;
  for (int i = 0; i < 1000; i++) h.record(5000000);  // 5 ms
  auto p99 = h.percentile(0.99);
  REQUIRE(p99.ok());
  CHECK_LT(rel_err(*p99, 5000000), 0.01);
}

TEST_CASE("1..1000 ms p99 matches the sort oracle within bucket width") {
  mb::LatencyHistogram h;
  std::vector<uint64_t> raw;
  for (uint64_t ms = 1; ms <= 1000; ms++) {
    h.record(ms * 1000000);
    raw.push_back(ms * 1000000);
  }
  auto p99 = h.percentile(0.99);
  REQUIRE(p99.ok());
  uint64_t expect = exact_percentile(raw, 0.99);
  CHECK_EQ(expect, 990000000);  // nearest-rank sample 990 ms
  CHECK_LT(rel_err(*p99, expect), 0.01);
}

TEST_CASE("q = 1 returns the max bucket representative") {
  mb::LatencyHistogram h;
  h.record(1000000);
  h.record(70000000);
  auto p100 = h.percentile(1.0);
  REQUIRE(p100.ok());
  CHECK_GE(*p100, h.max() * 100 / 101);
}

TEST_CASE("empty histogram and bad q are typed errors") {
  mb::LatencyHistogram h;
  CHECK_EQ(h.percentile(0.99).code(), mb::Errc::empty_histogram);
  h.record(1000);
  CHECK_EQ(h.percentile(0.0).code(), mb::Errc::invalid_argument);
  CHECK_EQ(h.percentile(1.5).code(), mb::Errc::invalid_argument);
}

TEST_CASE("merge: identity element, counts add, config mismatch") {
  mb::LatencyHistogram a, b, empty;
  for (int i = 0; i < 100; i++) a.record(1000 + static_cast<uint64_t>(i) * 997);
  for (int i = 0; i < 250; i++) b.record(50000 + static_cast<uint64_t>(i) * 131);

  mb::LatencyHistogram merged = a;
  REQUIRE(merged.merge(empty).ok());
  CHECK_EQ(merged.count(), a.count());

  REQUIRE(merged.merge(b).ok());
  CHECK_EQ(merged.count(), 350);

  mb::LatencyHistogram::Config other;
  other.relative_width = 0.02;
  mb::LatencyHistogram c(other);
  CHECK_EQ(merged.merge(c).code(), mb::Errc::config_mismatch);
}

TEST_CASE("merged percentiles match the concatenated raw samples") {
  mb::Rng rng(99);
  mb::LatencyHistogram a, b;
  std::vector<uint64_t> raw;
  for (int i = 0; i < 20000; i++) {
    uint64_t v = 1000 + rng.next_u64() % 100000000;
    a.record(v);
    raw.push_back(v);
  }
  for (int i = 0; i < 30000; i++) {
    uint64_t v = 1000 + rng.next_u64() % 1000000;
    b.record(v);
    raw.push_back(v);
  }
  REQUIRE(a.merge(b).ok());
  for (double q : {0.5, 0.9, 0.99}) {
    auto p = a.percentile(q);
    REQUIRE(p.ok());
    CHECK_LT(rel_err(*p, exact_percentile(raw, q)), 0.01);
  }
}

TEST_CASE("percentiles within 1% of exact sort across distributions") {
  mb::Rng rng(31337);
  auto check_dist = [&](auto gen) {
    mb::LatencyHistogram h;
    std::vector<uint64_t> raw;
    for (int i = 0; i < 100000; i++) {
      uint64_t v = gen();
      h.record(v);
      raw.push_back(v);
    }
    for (double q : {0.5, 0.9, 0.99}) {
      auto p = h.percentile(q);
      REQUIRE(p.ok());
      CHECK_LT(rel_err(*p, exact_percentile(raw, q)), 0.01);
    }
  };
  check_dist([&] { return 10000 + rng.next_u64() % 50000000; });          // uniform
  check_dist([&] {                                                        // log-normal
    return static_cast<uint64_t>(std::max(2000.0, rng.lognormal(2000000.0, 1.0)));
  });
  check_dist([&] {                                                        // bimodal
    return rng.next_u64() % 2 == 0 ? 50000 + rng.next_u64() % 5000
                                   : 80000000 + rng.next_u64() % 800000;
  });
}
