// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <unistd.h>

#include <algorithm>
#include <filesystem>

#include "doctest.h"
#include "moviebench/rng.hpp"
#include "moviebench/trace_assemble.hpp"

namespace mb = moviebench;
namespace fs = std::filesystem;

namespace {

mb::Span make_span(uint64_t trace, uint64_t span, uint64_t parent, mb::SpanKind kind,
                   uint64_t t0, uint64_t t1, const std::string& svc = "svc") {
  mb::Span s;
  s.trace_id = {0, trace};
  s.span_id = span;
  s.parent_span_id = parent;
  s.service = svc;
  s.operation = "Op";
  s.kind = kind;
  s.t_start = t0;
  s.t_end = t1;
  s.net_ns = 0;
  s.app_ns = kind == mb::SpanKind::server ? (t1 - t0) / 2 : 0;
  return s;
}

}  // namespace

TEST_CASE("root plus child assembles into one depth-2 tree") {
  std::vector<mb::Span> spans;
  spans.push_back(make_span(1, 10, 0, mb::SpanKind::server, 0, 100));
  spans.push_back(make_span(1, 11, 10, mb::SpanKind::client, 10, 60));
  spans.push_back(make_span(1, 11, 10, mb::SpanKind::server, 12, 58, "child"));

  auto result = mb::assemble(spans);
  REQUIRE_EQ(result.trees.size(), 1);
  CHECK(result.orphans.empty());
  const auto& tree = result.trees[0];
  REQUIRE(tree.root != nullptr);
  CHECK_EQ(tree.root->span_id, 10);
  REQUIRE_EQ(tree.root->children.size(), 1);
  CHECK_EQ(tree.root->children[0]->span_id, 11);
  CHECK(tree.root->children[0]->server != nullptr);
  CHECK(tree.root->children[0]->client != nullptr);
  CHECK(tree.complete());
}

TEST_CASE("a span with an unknown parent becomes an orphan, not a tree") {
  std::vector<mb::Span> spans;
  spans.push_back(make_span(1, 20, 999, mb::SpanKind::server, 0, 50));
  auto result = mb::assemble(spans);
  CHECK_EQ(result.trees.size(), 0);
  REQUIRE_EQ(result.orphans.size(), 1);
  CHECK_EQ(result.orphans[0].span_id, 20);
}

TEST_CASE("duplicate span lines deduplicate to the first instance") {
  std::vector<mb::Span> spans;
  spans.push_back(make_span(1, 10, 0, mb::SpanKind::server, 0, 100));
  spans.push_back(make_span(1, 10, 0, mb::SpanKind::server, 0, 100));
  auto result = mb::assemble(spans);
  CHECK_EQ(result.trees.size(), 1);
  CHECK_EQ(result.trees[0].node_count(), 1);
}

TEST_CASE("1000 shuffled well-formed traces partition exactly by trace id") {
  mb::Rng rng(515);
  std::vector<mb::Span> spans;
  std::vector<size_t> expected_nodes(1001, 0);
  for (uint64_t trace = 1; trace <= 1000; trace++) {
    size_t depth = 1 + rng.next_u64() % 4;
    uint64_t parent = 0;
    uint64_t t0 = 0, t1 = 1000000;
    for (size_t d = 0; d < depth; d++) {
      uint64_t span_id = trace * 100 + d + 1;
      spans.push_back(make_span(trace, span_id, parent, mb::SpanKind::server, t0, t1));
      if (d > 0) {
        spans.push_back(make_span(trace, span_id, parent, mb::SpanKind::client, t0 - 2, t1 + 2));
      }
      expected_nodes[trace]++;
      parent = span_id;
      t0 += 10;
      t1 -= 10;
    }
  }
  // Shuffle across traces.
  for (size_t i = spans.size(); i > 1; i--) {
    std::swap(spans[i - 1], spans[rng.next_u64() % i]);
  }

  auto result = mb::assemble(spans);
  CHECK_EQ(result.trees.size(), 1000);
  CHECK(result.orphans.empty());
  for (const auto& tree : result.trees) {
    uint64_t trace = tree.trace_id.lo;
    REQUIRE_GE(trace, 1);
    REQUIRE_LE(trace, 1000);
    CHECK_EQ(tree.node_count(), expected_nodes[trace]);
    for (const auto& node : tree.nodes) {
      CHECK(node->server->trace_id == tree.trace_id);
    }
  }
}

TEST_CASE("span log write-then-load is identity; garbage lines are reported") {
  std::string path = (fs::temp_directory_path() /
                      ("moviebench-spanlog-" + std::to_string(getpid())))
                         .string();
  std::vector<mb::Span> spans;
  for (uint64_t i = 1; i <= 100; i++) {
    spans.push_back(make_span(i, i * 2, 0, i % 2 == 0 ? mb::SpanKind::server : mb::SpanKind::client,
                              i, i + 100));
  }
  REQUIRE(mb::write_span_log(path, spans).ok());
  auto loaded = mb::load_span_log(path);
  REQUIRE(loaded.ok());
  CHECK_EQ(loaded->spans.size(), 100);
  CHECK(loaded->malformed_lines.empty());
  for (size_t i = 0; i < 100; i++) CHECK(loaded->spans[i] == spans[i]);

  // Inject one garbage line in the middle.
  {
    FILE* f = fopen(path.c_str(), "ab");
    fputs("not a span line at all\n", f);
    fclose(f);
  }
  REQUIRE(mb::write_span_log(path + ".2", spans).ok());
  {
    FILE* f = fopen((path + ".2").c_str(), "ab");
    fputs("zzzz\n", f);
    fclose(f);
  }
  auto with_garbage = mb::load_span_log(path + ".2");
  REQUIRE(with_garbage.ok());
  CHECK_EQ(with_garbage->spans.size(), 100);
  REQUIRE_EQ(with_garbage->malformed_lines.size(), 1);
  CHECK_EQ(with_garbage->malformed_lines[0], 101);

  // Empty file loads to nothing.
  { fclose(fopen((path + ".empty").c_str(), "wb")); }
  auto empty = mb::load_span_log(path + ".empty");
  REQUIRE(empty.ok());
  CHECK(empty->spans.empty());
  CHECK(empty->malformed_lines.empty());

  fs::remove(path);
  fs::remove(path + ".2");
  fs::remove(path + ".empty");
}
