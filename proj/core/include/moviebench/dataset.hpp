// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "moviebench/common.hpp"

namespace moviebench {

// Synthetic corpus layout under a dataset directory:
//   manifest            text: counts, seed, checksum
//   records/store.log   seed state for the store tier (LogStore format)
//   blobs/<ref>         raw photo and video blobs
//
// Generation is deterministic in (movies, users, seed, video_bytes): same
// inputs, same checksum, byte-for-byte. Plot and photo sizes are log-normal
// (median 4 KiB, sigma 1.0 in log space), reviews per movie are
// Zipf(s = 1.2) capped at 200, videos are fixed-size.

struct DatasetOptions {
  std::string dir;
  uint64_t movies = 1000;
  uint64_t users = 0;  // 0 = max(100, movies / 4)
  uint64_t seed = 1;
  uint64_t video_bytes = 50ull << 20;
};

struct DatasetManifest {
  std::string dir;
  uint64_t movies = 0;
  uint64_t users = 0;
  uint64_t seed = 0;
  uint64_t video_bytes = 0;
  uint64_t blobs = 0;
  uint64_t reviews = 0;
  uint64_t checksum = 0;
};

Result<DatasetManifest> generate_dataset(const DatasetOptions& opts);
Result<DatasetManifest> load_manifest(const std::string& dir);

std::string dataset_store_log(const std::string& dir);
std::string dataset_blob_path(const std::string& dir, const std::string& ref);

Result<uint64_t> blob_size(const std::string& dir, const std::string& ref);
Result<std::string> read_blob_range(const std::string& dir, const std::string& ref,
                                    uint64_t offset, uint64_t len);

std::string video_ref_for(uint64_t movie_id);

}  // namespace moviebench
