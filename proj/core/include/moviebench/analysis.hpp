// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "moviebench/trace_assemble.hpp"

namespace moviebench {

enum class PathCategory : uint8_t { compute, network, wait };
const char* path_category_name(PathCategory c);

struct PathSegment {
  std::string service;
  PathCategory category = PathCategory::compute;
  uint64_t duration_ns = 0;
};

// Backward-sweep critical path over an assembled tree. Starting at the root's
// end, repeatedly pick the child client interval with the latest end before
// the cursor; gaps belong to the parent (split compute/wait in proportion to
// its app/wait accounting); a selected child call contributes exactly its
// client-interval duration, decomposed into cross-process network+wait
// (client duration minus the matched server's app_ns, labelled using the
// server's own net/wait accounting with the remainder as network) plus the
// server's handler-interior critical path. Segment durations sum to the root
// span duration exactly.
Result<std::vector<PathSegment>> critical_path(const SpanTree& tree);

struct Breakdown {
  std::map<std::string, double> fraction;  // per service, sums to 1
  std::map<std::string, uint64_t> total_ns;
  uint64_t total_traces = 0;
  uint64_t excluded_traces = 0;  // incomplete trees skipped
  std::string load_label;
};

enum class BreakdownMode { critical_path, total_time };

Result<Breakdown> per_service_breakdown(const std::vector<SpanTree>& trees,
                                        const std::string& load_label,
                                        BreakdownMode mode = BreakdownMode::critical_path);

struct ServiceSplit {
  double network_fraction = 0;
  double compute_fraction = 0;
  double wait_fraction = 0;
  uint64_t spans = 0;
  uint64_t total_ns = 0;
};

// Per-service net/app/wait aggregation over all server spans in the trees.
Result<std::map<std::string, ServiceSplit>> comm_compute_split(const std::vector<SpanTree>& trees);

// Aggregate network share across every service (span-duration weighted).
Result<double> aggregate_network_fraction(const std::vector<SpanTree>& trees);

struct ShiftRow {
  std::string service;
  double low_fraction = 0;
  double high_fraction = 0;
  double delta = 0;
  int rank_low = 0;   // 1 = largest fraction
  int rank_high = 0;
};

struct ShiftReport {
  std::vector<ShiftRow> rows;  // ordered by delta descending
  std::vector<std::pair<std::string, std::string>> inversions;  // (was-ahead, now-ahead)
  Breakdown low;
  Breakdown high;
};

Result<ShiftReport> compare_loads(const Breakdown& low, const Breakdown& high);

// CSV emitters; identical input bytes yield identical output bytes.
std::string breakdown_to_csv(const Breakdown& b);
std::string split_to_csv(const std::map<std::string, ServiceSplit>& splits);
std::string shift_to_csv(const ShiftReport& r);
Status write_text_file(const std::string& path, const std::string& content);
Result<Breakdown> breakdown_from_csv(const std::string& path);

}  // namespace moviebench
