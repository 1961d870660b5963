// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/trace_assemble.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <unordered_map>

namespace moviebench {

Result<SpanLogLoad> load_span_log(const std::string& path) {
  FILE* f = fopen(path.c_str(), "rb");
  if (f == nullptr) return Error{Errc::io_error, "cannot open span log '" + path + "'"};
  SpanLogLoad out;
  std::string line;
  int line_no = 0;
  char buf[4096];
  std::string carry;
  while (fgets(buf, sizeof(buf), f) != nullptr) {
    carry += buf;
    if (!carry.empty() && carry.back() != '\n' && !feof(f)) continue;  // long line
    line_no++;
    line = std::move(carry);
    carry.clear();
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    if (line.empty()) continue;
    auto span = span_from_line(line);
    if (span) {
      out.spans.push_back(std::move(*span));
    } else {
      out.malformed_lines.push_back(line_no);
    }
  }
  if (!carry.empty()) {
    line_no++;
    while (!carry.empty() && (carry.back() == '\n' || carry.back() == '\r')) carry.pop_back();
    auto span = span_from_line(carry);
    if (span) {
      out.spans.push_back(std::move(*span));
    } else {
      out.malformed_lines.push_back(line_no);
    }
  }
  fclose(f);
  return out;
}

Status write_span_log(const std::string& path, const std::vector<Span>& spans) {
  FILE* f = fopen(path.c_str(), "wb");
  if (f == nullptr) return Error{Errc::io_error, "cannot open '" + path + "' for write"};
  for (const auto& s : spans) {
    std::string line = span_to_line(s);
    fwrite(line.data(), 1, line.size(), f);
    fputc('\n', f);
  }
  fclose(f);
  return ok_status();
}

bool SpanTree::complete() const {
  for (const auto& n : nodes) {
    if (n->server == nullptr) return false;
    if (n.get() != root && n->client == nullptr) return false;
  }
  return root != nullptr && root->server != nullptr;
}

AssembleResult assemble(const std::vector<Span>& spans) {
  AssembleResult out;

  // Group spans per trace, keeping input order within a trace stable.
  std::map<U128, std::vector<const Span*>> traces;
  for (const auto& s : spans) traces[s.trace_id].push_back(&s);

  for (auto& [trace_id, members] : traces) {
    std::unordered_map<uint64_t, std::unique_ptr<TraceNode>> nodes;
    for (const Span* s : members) {
      auto& node = nodes[s->span_id];
      if (!node) {
        node = std::make_unique<TraceNode>();
        node->span_id = s->span_id;
      }
      if (s->kind == SpanKind::server) {
        if (node->server == nullptr) node->server = s;  // first wins on duplicates
      } else {
        if (node->client == nullptr) node->client = s;
      }
    }

    // Link children; a node's parent comes from either view (they agree by
    // construction; prefer the server view).
    auto parent_of = [](const TraceNode& n) -> uint64_t {
      if (n.server != nullptr) return n.server->parent_span_id;
      return n.client->parent_span_id;
    };

    std::vector<TraceNode*> roots;
    std::vector<uint64_t> orphan_ids;
    for (auto& [id, node] : nodes) {
      uint64_t parent = parent_of(*node);
      if (parent == 0) {
        roots.push_back(node.get());
        continue;
      }
      auto it = nodes.find(parent);
      if (it == nodes.end()) {
        orphan_ids.push_back(id);
        continue;
      }
      it->second->children.push_back(node.get());
    }

    // Orphan subtrees surface as orphan spans, never silently dropped.
    for (uint64_t id : orphan_ids) {
      auto& node = nodes[id];
      if (node->server != nullptr) out.orphans.push_back(*node->server);
      if (node->client != nullptr) out.orphans.push_back(*node->client);
      // Children of an orphan stay attached beneath it and are reported
      // through their own spans only if they are themselves orphaned; they
      // are unreachable from any tree, so emit them too.
      std::vector<TraceNode*> stack(node->children.begin(), node->children.end());
      while (!stack.empty()) {
        TraceNode* n = stack.back();
        stack.pop_back();
        if (n->server != nullptr) out.orphans.push_back(*n->server);
        if (n->client != nullptr) out.orphans.push_back(*n->client);
        for (auto* c : n->children) stack.push_back(c);
      }
    }

    auto sort_key = [](const TraceNode* n) -> uint64_t {
      if (n->client != nullptr) return n->client->t_start;
      return n->server != nullptr ? n->server->t_start : 0;
    };

    for (TraceNode* root : roots) {
      SpanTree tree;
      tree.trace_id = trace_id;
      // Move reachable nodes into the tree and sort children by t_start.
      std::vector<TraceNode*> stack{root};
      while (!stack.empty()) {
        TraceNode* n = stack.back();
        stack.pop_back();
        std::sort(n->children.begin(), n->children.end(),
                  [&](const TraceNode* a, const TraceNode* b) {
                    uint64_t ka = sort_key(a), kb = sort_key(b);
                    if (ka != kb) return ka < kb;
                    return a->span_id < b->span_id;
                  });
        auto it = nodes.find(n->span_id);
        tree.nodes.push_back(std::move(it->second));
        for (auto* c : n->children) stack.push_back(c);
      }
      tree.root = root;
      out.trees.push_back(std::move(tree));
    }
  }
  return out;
}

}  // namespace moviebench
