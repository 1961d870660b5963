// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "moviebench/common.hpp"

namespace moviebench {

// Fixed-relative-precision latency recorder: geometric buckets spanning
// [min_ns, max_ns] at <= 1% relative width. Values outside the range clamp
// into the edge buckets; exact min/max are tracked separately.
class LatencyHistogram {
 public:
  struct Config {
    uint64_t min_ns = 1000;              // 1 us
    uint64_t max_ns = 100000000000ull;   // 100 s
    double relative_width = 0.01;

    friend bool operator==(const Config&, const Config&) = default;
  };

  LatencyHistogram();
  explicit LatencyHistogram(Config config);

  void record(uint64_t ns);

  // Nearest-rank percentile on the bucketed distribution, q in (0, 1].
  // Returns the geometric midpoint of the bucket holding the ceil(q*N)-th
  // sample. Errc::empty_histogram when no samples.
  Result<uint64_t> percentile(double q) const;

  // Bucket-wise sum; Errc::config_mismatch when configs differ.
  Status merge(const LatencyHistogram& other);

  uint64_t count() const { return count_; }
  uint64_t min() const { return min_; }
  uint64_t max() const { return max_; }
  uint64_t sum() const { return sum_; }
  const Config& config() const { return config_; }
  size_t bucket_count() const { return counts_.size(); }

 private:
  size_t bucket_index(uint64_t ns) const;
  uint64_t bucket_midpoint(size_t idx) const;

  Config config_;
  double inv_log_ratio_;
  std::vector<uint64_t> counts_;
  uint64_t count_ = 0;
  uint64_t sum_ = 0;
  uint64_t min_ = 0;
  uint64_t max_ = 0;
};

}  // namespace moviebench
