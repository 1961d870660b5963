// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <unistd.h>

#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "moviebench/analysis.hpp"

namespace mb = moviebench;

namespace {

mb::Span simple_server(uint64_t trace, const std::string& svc, uint64_t dur, uint64_t net,
                       uint64_t app) {
  mb::Span s;
  s.trace_id = {0, trace};
  s.span_id = trace * 10;
  s.parent_span_id = 0;
  s.service = svc;
  s.operation = "Op";
  s.kind = mb::SpanKind::server;
  s.t_start = 0;
  s.t_end = dur;
  s.net_ns = net;
  s.app_ns = app;
  return s;
}

std::vector<mb::SpanTree> trees_of(const std::vector<mb::Span>& spans) {
  auto assembled = mb::assemble(spans);
  return std::move(assembled.trees);
}

}  // namespace

TEST_CASE("breakdown of frontend-only traces is {frontend: 1.0}") {
  std::vector<mb::Span> spans;
  for (uint64_t t = 1; t <= 5; t++) spans.push_back(simple_server(t, "frontend", 1000, 0, 1000));
  auto trees = trees_of(spans);
  auto b = mb::per_service_breakdown(trees, "low");
  REQUIRE(b.ok());
  CHECK_EQ(b->fraction.size(), 1);
  CHECK(std::abs(b->fraction.at("frontend") - 1.0) < 1e-12);
  CHECK_EQ(b->total_traces, 5);
  CHECK_EQ(b->load_label, "low");
}

TEST_CASE("breakdown fractions follow per-service totals") {
  std::vector<mb::Span> spans;
  spans.push_back(simple_server(1, "A", 6000000, 0, 6000000));
  spans.push_back(simple_server(2, "B", 4000000, 0, 4000000));
  auto trees = trees_of(spans);
  auto b = mb::per_service_breakdown(trees, "x");
  REQUIRE(b.ok());
  CHECK(std::abs(b->fraction.at("A") - 0.6) < 1e-9);
  CHECK(std::abs(b->fraction.at("B") - 0.4) < 1e-9);

  // Fractions sum to 1.
  double sum = 0;
  for (const auto& [svc, f] : b->fraction) sum += f;
  CHECK(std::abs(sum - 1.0) < 1e-9);
}

TEST_CASE("empty input is a typed error") {
  std::vector<mb::SpanTree> none;
  CHECK_EQ(mb::per_service_breakdown(none, "x").code(), mb::Errc::empty_input);
  CHECK_EQ(mb::comm_compute_split(none).code(), mb::Errc::empty_input);
}

TEST_CASE("comm_compute_split: hand-built span gives (0.3, 0.6, 0.1)") {
  std::vector<mb::Span> spans{simple_server(1, "svc", 10000000, 3000000, 6000000)};
  auto trees = trees_of(spans);
  auto splits = mb::comm_compute_split(trees);
  REQUIRE(splits.ok());
  const auto& sp = splits->at("svc");
  CHECK(std::abs(sp.network_fraction - 0.3) < 1e-9);
  CHECK(std::abs(sp.compute_fraction - 0.6) < 1e-9);
  CHECK(std::abs(sp.wait_fraction - 0.1) < 1e-9);
  CHECK(std::abs(sp.network_fraction + sp.compute_fraction + sp.wait_fraction - 1.0) < 1e-9);
}

TEST_CASE("comm_compute_split: zero net everywhere means zero network fraction") {
  std::vector<mb::Span> spans;
  spans.push_back(simple_server(1, "a", 100, 0, 60));
  spans.push_back(simple_server(2, "b", 100, 0, 100));
  auto trees = trees_of(spans);
  auto splits = mb::comm_compute_split(trees);
  REQUIRE(splits.ok());
  for (const auto& [svc, sp] : *splits) CHECK_EQ(sp.network_fraction, 0.0);
}

TEST_CASE("compare_loads flags risers and rank inversions") {
  mb::Breakdown low, high;
  low.fraction = {{"A", 0.7}, {"B", 0.3}};
  high.fraction = {{"A", 0.4}, {"B", 0.6}};
  low.total_traces = high.total_traces = 10;
  auto report = mb::compare_loads(low, high);
  REQUIRE(report.ok());
  REQUIRE_EQ(report->rows.size(), 2);
  CHECK_EQ(report->rows[0].service, "B");  // biggest riser first
  CHECK_GT(report->rows[0].delta, 0);
  REQUIRE_EQ(report->inversions.size(), 1);
  CHECK_EQ(report->inversions[0].first, "A");
  CHECK_EQ(report->inversions[0].second, "B");
}

TEST_CASE("compare_loads on identical breakdowns: zero deltas, no inversions") {
  mb::Breakdown b;
  b.fraction = {{"A", 0.5}, {"B", 0.5}};
  auto report = mb::compare_loads(b, b);
  REQUIRE(report.ok());
  for (const auto& row : report->rows) CHECK_EQ(row.delta, 0.0);
  CHECK(report->inversions.empty());
}

TEST_CASE("compare_loads rejects mismatched service sets") {
  mb::Breakdown low, high;
  low.fraction = {{"A", 1.0}};
  high.fraction = {{"B", 1.0}};
  auto report = mb::compare_loads(low, high);
  REQUIRE_FALSE(report.ok());
  CHECK_EQ(report.code(), mb::Errc::service_set_mismatch);
  CHECK(report.error().detail.find("A") != std::string::npos);
  CHECK(report.error().detail.find("B") != std::string::npos);
}

TEST_CASE("CSV emitters are deterministic and follow the documented schemas") {
  mb::Breakdown b;
  b.fraction = {{"A", 0.6}, {"B", 0.4}};
  b.total_ns = {{"A", 600}, {"B", 400}};
  b.total_traces = 2;
  b.load_label = "low";
  std::string csv1 = mb::breakdown_to_csv(b);
  std::string csv2 = mb::breakdown_to_csv(b);
  CHECK_EQ(csv1, csv2);
  CHECK(csv1.find("service,fraction,traces,load_label\n") != std::string::npos);
  CHECK(csv1.find("A,0.600000000,2,low\n") != std::string::npos);
  CHECK(csv1.find("B,0.400000000,2,low\n") != std::string::npos);

  // Write, read back, compare.
  std::string path = (std::filesystem::temp_directory_path() /
                      ("moviebench-bcsv-" + std::to_string(getpid())))
                         .string();
  REQUIRE(mb::write_text_file(path, csv1).ok());
  auto back = mb::breakdown_from_csv(path);
  REQUIRE(back.ok());
  CHECK(std::abs(back->fraction.at("A") - 0.6) < 1e-9);
  CHECK_EQ(back->load_label, "low");
  std::filesystem::remove(path);

  mb::Breakdown high = b;
  high.fraction = {{"A", 0.4}, {"B", 0.6}};
  auto report = mb::compare_loads(b, high);
  REQUIRE(report.ok());
  std::string shift_csv = mb::shift_to_csv(*report);
  CHECK(shift_csv.find("service,low_fraction,high_fraction,delta,rank_low,rank_high\n") !=
        std::string::npos);
  CHECK(shift_csv.find("# inversions: A>B\n") != std::string::npos);
}
