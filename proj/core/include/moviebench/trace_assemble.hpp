// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moviebench/span.hpp"

namespace moviebench {

struct SpanLogLoad {
  std::vector<Span> spans;
  std::vector<int> malformed_lines;  // 1-based line numbers, skipped
};

// Write-then-load is identity on all span fields; malformed lines are
// reported and skipped, never fatal.
Result<SpanLogLoad> load_span_log(const std::string& path);
Status write_span_log(const std::string& path, const std::vector<Span>& spans);

// One node per span_id: the server and client views of the same call.
// Children are ordered by client-interval start (the parent's clock).
struct TraceNode {
  uint64_t span_id = 0;
  const Span* server = nullptr;
  const Span* client = nullptr;
  std::vector<TraceNode*> children;
};

struct SpanTree {
  U128 trace_id;
  TraceNode* root = nullptr;
  std::vector<std::unique_ptr<TraceNode>> nodes;

  // True when every node has a server span and every non-root node has the
  // client view recorded by its parent process.
  bool complete() const;
  size_t node_count() const { return nodes.size(); }
};

struct AssembleResult {
  std::vector<SpanTree> trees;
  std::vector<Span> orphans;  // parent id absent from the trace's span set
};

// Groups by trace_id and links by parent_span_id. Spans are borrowed: the
// input vector must outlive the result.
AssembleResult assemble(const std::vector<Span>& spans);

}  // namespace moviebench
