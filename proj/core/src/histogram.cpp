// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/histogram.hpp"

#include <cmath>

namespace moviebench {

LatencyHistogram::LatencyHistogram() : LatencyHistogram(Config{}) {}

LatencyHistogram::LatencyHistogram(Config config) : config_(config) {
  double ratio = std::log1p(config_.relative_width);
  inv_log_ratio_ = 1.0 / ratio;
  double span = std::log(static_cast<double>(config_.max_ns) / static_cast<double>(config_.min_ns));
  size_t buckets = static_cast<size_t>(std::floor(span * inv_log_ratio_)) + 1;
  counts_.assign(buckets, 0);
}

size_t LatencyHistogram::bucket_index(uint64_t ns) const {
  if (ns <= config_.min_ns) return 0;
  if (ns >= config_.max_ns) return counts_.size() - 1;
  double x = std::log(static_cast<double>(ns) / static_cast<double>(config_.min_ns));
  auto idx = static_cast<size_t>(x * inv_log_ratio_);
  if (idx >= counts_.size()) idx = counts_.size() - 1;
  return idx;
}

uint64_t LatencyHistogram::bucket_midpoint(size_t idx) const {
  double lo_exp = static_cast<double>(idx) / inv_log_ratio_;
  double mid = static_cast<double>(config_.min_ns) * std::exp(lo_exp + 0.5 / inv_log_ratio_);
  if (mid > static_cast<double>(config_.max_ns)) mid = static_cast<double>(config_.max_ns);
  return static_cast<uint64_t>(mid);
}

void LatencyHistogram::record(uint64_t ns) {
  counts_[bucket_index(ns)]++;
  count_++;
  sum_ += ns;
  if (count_ == 1) {
    min_ = max_ = ns;
  } else {
    if (ns < min_) min_ = ns;
    if (ns > max_) max_ = ns;
  }
}

Result<uint64_t> LatencyHistogram::percentile(double q) const {
  if (count_ == 0) return Error{Errc::empty_histogram, "no samples"};
  if (q <= 0.0 || q > 1.0) return Error{Errc::invalid_argument, "q must be in (0,1]"};
  auto rank = static_cast<uint64_t>(std::ceil(q * static_cast<double>(count_)));
  if (rank == 0) rank = 1;
  uint64_t cum = 0;
  for (size_t i = 0; i < counts_.size(); i++) {
    cum += counts_[i];
    if (cum >= rank) return bucket_midpoint(i);
  }
  return bucket_midpoint(counts_.size() - 1);
}

Status LatencyHistogram::merge(const LatencyHistogram& other) {
  if (!(config_ == other.config_)) return Error{Errc::config_mismatch, "bucket configs differ"};
  for (size_t i = 0; i < counts_.size(); i++) counts_[i] += other.counts_[i];
  if (other.count_ > 0) {
    if (count_ == 0) {
      min_ = other.min_;
      max_ = other.max_;
    } else {
      if (other.min_ < min_) min_ = other.min_;
      if (other.max_ > max_) max_ = other.max_;
    }
  }
  count_ += other.count_;
  sum_ += other.sum_;
  return ok_status();
}

}  // namespace moviebench
