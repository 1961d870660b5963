// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "moviebench/histogram.hpp"
#include "moviebench/tracer.hpp"

namespace moviebench {

enum class RequestType : uint8_t { browse = 0, review = 1, rent = 2 };
enum class Arrival : uint8_t { poisson, uniform };

struct RequestMix {
  double browse = 0.8;
  double review = 0.15;
  double rent = 0.05;

  Status validate() const;  // weights sum to 1 +- 1e-9, none negative
  static Result<RequestMix> parse(std::string_view text);  // "browse=0.8,review=0.15,rent=0.05"
};

// Open-loop discipline: send times are pre-scheduled from (rate, duration,
// seed, arrival) alone, and latency is measured from the scheduled send time,
// never the actual one, so a slow server cannot hide queueing behind delayed
// sends (coordinated omission).
struct LoadOptions {
  std::string entry;
  RequestMix mix;
  double rate_qps = 0;
  uint64_t duration_ns = 0;
  uint64_t seed = 1;
  Arrival arrival = Arrival::poisson;
  int workers = 64;
  uint64_t timeout_ns = 1000000000ull;
  uint64_t warmup_ns = 5000000000ull;  // scheduled sends before this offset are discarded
  uint64_t movies = 0;                 // id draw ranges (from the dataset manifest)
  uint64_t users = 0;
  uint64_t rent_price = 1;
  size_t max_frame = kDefaultMaxFrame;
  Recorder* recorder = nullptr;  // client spans, service name "client"
};

struct ScheduledSend {
  uint64_t at_ns = 0;  // offset from run start
  RequestType type = RequestType::browse;
  uint64_t movie_id = 0;
  uint64_t user_id = 0;
  uint8_t stars = 0;
  uint32_t text_len = 0;
};

// Deterministic in (rate, duration, seed, arrival, mix, movies, users).
std::vector<ScheduledSend> build_schedule(const LoadOptions& opts);

struct RunResult {
  double offered_qps = 0;
  double achieved_qps = 0;  // responses completed inside the measured window, per second
  uint64_t window_ns = 0;
  LatencyHistogram all, browse, review, rent;
  uint64_t scheduled = 0;  // in measurement window
  uint64_t ok = 0;         // eventual successes (conservation: ok+errors+timeouts+shed)
  uint64_t ok_in_window = 0;
  uint64_t errors = 0;
  uint64_t timeouts = 0;
  uint64_t shed = 0;
  uint64_t rpc_total = 0;  // individual RPCs issued (a rent flow is many)
  uint64_t rpc_ok = 0;
  uint64_t lag_p99_ns = 0;  // actual send minus scheduled send
  uint64_t lag_max_ns = 0;
  bool lag_ok = true;  // p99 lag <= 1 ms
};

Result<RunResult> run_load(const LoadOptions& opts);

struct SweepPoint {
  double offered_qps = 0;
  double achieved_qps = 0;          // median across repeats
  uint64_t p50_ns = 0, p90_ns = 0;  // medians across repeats
  uint64_t p99_ns = 0;
  uint64_t p99_lo_ns = 0;  // 10th percentile across repeats
  uint64_t p99_hi_ns = 0;  // 90th percentile across repeats
  uint64_t errors = 0, timeouts = 0, shed = 0;  // medians
  std::vector<RunResult> runs;
};

struct SweepCurve {
  std::vector<SweepPoint> points;  // offered rates strictly increasing
};

struct SweepOptions {
  LoadOptions base;                 // rate/duration overridden per point
  std::vector<double> rates;        // strictly increasing
  uint64_t duration_per_point_ns = 0;
  uint64_t cooldown_ns = 2000000000ull;
  int repeats = 1;
};

Result<SweepCurve> sweep(const SweepOptions& opts);

struct KneeConfig {
  double throughput_factor = 0.95;  // achieved < f * offered flags saturation
  double p99_factor = 10.0;         // p99 > f * baseline p99 flags saturation
};

// Smallest offered rate where either criterion trips; nullopt when none does.
Result<std::optional<double>> find_knee(const SweepCurve& curve, KneeConfig cfg = KneeConfig{});

// Fixed run/sweep CSV schema:
// offered_qps,achieved_qps,p50_us,p90_us,p99_us,p99_whisker_lo_us,p99_whisker_hi_us,errors,timeouts,shed
std::string curve_to_csv(const SweepCurve& curve);
Status write_curve_csv(const std::string& path, const SweepCurve& curve);
SweepPoint run_to_point(const RunResult& r);

}  // namespace moviebench
