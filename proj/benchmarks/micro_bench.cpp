// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <benchmark/benchmark.h>

#include "moviebench/compute.hpp"
#include "moviebench/histogram.hpp"
#include "moviebench/rng.hpp"
#include "moviebench/span.hpp"
#include "moviebench/wire.hpp"

namespace mb = moviebench;

namespace {

mb::RpcMessage sample_message(size_t value_bytes) {
  mb::RpcMessage m;
  m.method = "ComposePage";
  m.context.trace_id = {0x1234, 0x5678};
  m.context.span_id = 42;
  m.context.parent_span_id = 0;
  m.add(0, std::string(value_bytes, 'x'));
  return m;
}

void BM_EncodeFrame(benchmark::State& state) {
  auto msg = sample_message(static_cast<size_t>(state.range(0)));
  for (auto _ : state) {
    auto frame = mb::encode_frame(msg);
    benchmark::DoNotOptimize(frame);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_EncodeFrame)->Arg(64)->Arg(4096)->Arg(1 << 20);

void BM_DecodeFrame(benchmark::State& state) {
  auto frame = mb::encode_frame(sample_message(static_cast<size_t>(state.range(0))));
  for (auto _ : state) {
    auto msg = mb::decode_frame(*frame);
    benchmark::DoNotOptimize(msg);
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) * state.range(0));
}
BENCHMARK(BM_DecodeFrame)->Arg(64)->Arg(4096)->Arg(1 << 20);

void BM_HistogramRecord(benchmark::State& state) {
  mb::LatencyHistogram h;
  mb::Rng rng(7);
  for (auto _ : state) {
    h.record(1000 + rng.next_u64() % 10000000);
  }
  benchmark::DoNotOptimize(h.count());
}
BENCHMARK(BM_HistogramRecord);

void BM_SpanBufferRecord(benchmark::State& state) {
  mb::SpanBuffer buffer(1 << 16);
  mb::Span s;
  s.trace_id = {1, 2};
  s.span_id = 3;
  s.service = "frontend";
  s.operation = "ComposePage";
  s.t_start = 100;
  s.t_end = 2000;
  std::vector<mb::Span> sink;
  sink.reserve(1024);
  for (auto _ : state) {
    benchmark::DoNotOptimize(buffer.record(s));
    if (buffer.approx_size() > 60000) {
      sink.clear();
      buffer.drain(sink, 60000);
    }
  }
}
BENCHMARK(BM_SpanBufferRecord);

void BM_SyntheticCompute(benchmark::State& state) {
  std::string payload(static_cast<size_t>(state.range(0)), 'p');
  for (auto _ : state) {
    benchmark::DoNotOptimize(mb::synthetic_compute(payload, 10.0, 1.0));
  }
}
BENCHMARK(BM_SyntheticCompute)->Arg(1024)->Arg(16384);

}  // namespace

BENCHMARK_MAIN();
