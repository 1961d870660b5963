// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <algorithm>
#include <thread>
#include <vector>

#include "doctest.h"
#include "moviebench/app.hpp"

namespace mb = moviebench;

TEST_CASE("ids are strictly increasing per instance") {
  mb::UniqueIdGen gen(1);
  uint64_t prev = gen.next();
  for (int i = 0; i < 1000; i++) {
    uint64_t next = gen.next();
    CHECK_GT(next, prev);
    prev = next;
  }
}

TEST_CASE("instance id occupies the top 16 bits") {
  mb::UniqueIdGen gen(3);
  for (int i = 0; i < 100; i++) {
    CHECK_EQ(gen.next() >> 48, 3);
  }
}

TEST_CASE("a million ids across two instances never collide") {
  mb::UniqueIdGen a(7), b(9);
  std::vector<uint64_t> ids;
  ids.reserve(1000000);
  std::thread ta([&] {
    for (int i = 0; i < 500000; i++) ids.push_back(a.next());
  });
  std::vector<uint64_t> ids_b;
  ids_b.reserve(500000);
  std::thread tb([&] {
    for (int i = 0; i < 500000; i++) ids_b.push_back(b.next());
  });
  ta.join();
  tb.join();
  ids.insert(ids.end(), ids_b.begin(), ids_b.end());
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("concurrent calls on one instance stay unique") {
  mb::UniqueIdGen gen(2);
  std::vector<std::vector<uint64_t>> per_thread(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; t++) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50000; i++) per_thread[static_cast<size_t>(t)].push_back(gen.next());
    });
  }
  for (auto& t : threads) t.join();
  std::vector<uint64_t> all;
  for (auto& v : per_thread) all.insert(all.end(), v.begin(), v.end());
  std::sort(all.begin(), all.end());
  CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
}
