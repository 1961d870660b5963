// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "moviebench/app.hpp"
#include "moviebench/dataset.hpp"
#include "moviebench/deploy.hpp"
#include "moviebench/rng.hpp"
#include "moviebench/rpc_client.hpp"
#include "moviebench/trace_assemble.hpp"

namespace testenv {

namespace mb = moviebench;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The shipped topology with every port shifted, so parallel test cases and
// leftover sockets never collide.
inline mb::ServiceTopology shipped_topology(uint16_t port_base) {
  auto topo = mb::parse_topology(read_file(std::string(MOVIEBENCH_DATA_DIR) + "/movie.topology"));
  REQUIRE(topo.ok());
  uint16_t next = port_base;
  for (auto& s : topo->services) s.port = next++;
  return *topo;
}

// One small dataset per test process: 24 movies, 2 MiB videos.
inline const mb::DatasetManifest& small_dataset() {
  static mb::DatasetManifest manifest = [] {
    std::string dir = (std::filesystem::temp_directory_path() /
                       ("moviebench-testds-" + std::to_string(getpid())))
                          .string();
    std::filesystem::remove_all(dir);
    mb::DatasetOptions opts;
    opts.dir = dir;
    opts.movies = 24;
    opts.users = 40;
    opts.seed = 20260101;
    opts.video_bytes = 2ull << 20;
    auto man = mb::generate_dataset(opts);
    REQUIRE(man.ok());
    return *man;
  }();
  return manifest;
}

inline std::string fresh_run_dir(const std::string& tag) {
  std::string dir = (std::filesystem::temp_directory_path() /
                     ("moviebench-run-" + tag + "-" + std::to_string(getpid())))
                        .string();
  std::filesystem::remove_all(dir);
  return dir;
}

struct Client {
  mb::IdSource ids;
  mb::Channel channel;
  mb::CallOptions opts;

  explicit Client(const std::string& entry, mb::Recorder* recorder = nullptr)
      : channel(entry, "client", recorder) {
    opts.timeout_ns = 10000000000ull;
  }

  mb::Result<mb::RpcMessage> browse(uint64_t movie, mb::TraceContext* ctx_out = nullptr) {
    auto ctx = mb::root_context(ids);
    if (ctx_out != nullptr) *ctx_out = ctx;
    return channel.call(mb::make_browse_request(ctx, movie), opts);
  }
  mb::Result<mb::RpcMessage> review(uint64_t movie, uint64_t user, uint8_t stars,
                                    const std::string& text,
                                    mb::TraceContext* ctx_out = nullptr) {
    auto ctx = mb::root_context(ids);
    if (ctx_out != nullptr) *ctx_out = ctx;
    return channel.call(mb::make_review_request(ctx, movie, user, stars, text), opts);
  }
  mb::Result<mb::RpcMessage> rent_init(uint64_t user, uint64_t movie, uint64_t price) {
    return channel.call(mb::make_rent_request(mb::root_context(ids), user, movie, price), opts);
  }
  mb::Result<mb::RpcMessage> chunk(uint64_t movie, uint64_t index) {
    return channel.call(mb::make_chunk_request(mb::root_context(ids), movie, index), opts);
  }
};

// Decodes the rating section (tag 2) out of a ComposePage response:
// status byte, 8-byte digest, then the rating record.
inline mb::RatingRecord page_rating(const mb::RpcMessage& page) {
  const std::string* section = page.field(2);
  REQUIRE(section != nullptr);
  REQUIRE_GE(section->size(), 1 + 8 + 16);
  REQUIRE_EQ((*section)[0], 0);
  auto rating = mb::decode_rating(std::string_view(*section).substr(9));
  REQUIRE(rating.ok());
  return *rating;
}

inline std::vector<mb::Span> spans_for_trace(const std::string& span_log, const mb::U128& trace) {
  auto loaded = mb::load_span_log(span_log);
  REQUIRE(loaded.ok());
  std::vector<mb::Span> out;
  for (auto& s : loaded->spans) {
    if (s.trace_id == trace) out.push_back(std::move(s));
  }
  return out;
}

inline void wait_for_flush() { mb::sleep_ns(400000000ull); }  // > flush interval

}  // namespace testenv
