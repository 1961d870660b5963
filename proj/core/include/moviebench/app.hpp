// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "moviebench/lru_cache.hpp"
#include "moviebench/records.hpp"
#include "moviebench/store.hpp"
#include "moviebench/topology.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

// Application handlers are pure logic over an abstract data plane, so the
// microservices deployment (RPC-backed) and the monolith (direct function
// composition) run byte-identical code paths and produce byte-identical
// responses.

namespace methods {
inline constexpr const char* kComposePage = "ComposePage";
inline constexpr const char* kPlot = "Plot";
inline constexpr const char* kThumbnail = "Thumbnail";
inline constexpr const char* kRating = "Rating";
inline constexpr const char* kCastInfo = "CastInfo";
inline constexpr const char* kReviews = "Reviews";
inline constexpr const char* kPhotos = "Photos";
inline constexpr const char* kVideos = "Videos";
inline constexpr const char* kRecommend = "Recommend";
inline constexpr const char* kComposeReview = "ComposeReview";
inline constexpr const char* kUniqueId = "UniqueId";
inline constexpr const char* kMovieReview = "MovieReview";
inline constexpr const char* kUserReview = "UserReview";
inline constexpr const char* kReviewStorage = "ReviewStorage";
inline constexpr const char* kUpdateMovie = "UpdateMovie";
inline constexpr const char* kUserAuth = "UserAuth";
inline constexpr const char* kRentChunk = "RentChunk";
inline constexpr const char* kCacheGet = "CacheGet";
inline constexpr const char* kCachePut = "CachePut";
inline constexpr const char* kStoreGet = "StoreGet";
inline constexpr const char* kStorePut = "StorePut";
inline constexpr const char* kHealth = "Health";
inline constexpr const char* kSpanBatch = "SpanBatch";
inline constexpr const char* kSlowdown = "Slowdown";
inline constexpr const char* kStats = "Stats";
inline constexpr const char* kQuit = "Quit";
}  // namespace methods

struct RequestScope {
  TraceContext ctx;
  bool child_dropped = false;
  size_t queue_depth = 0;  // host admission backlog when dispatched
};

struct Invocation {
  std::string target;  // logical service name
  std::string method;
  std::vector<Field> fields;
};

class DataPlane {
 public:
  virtual ~DataPlane() = default;
  // Application-level error responses come back as messages with kind ==
  // error; transport failures come back as Result errors.
  virtual Result<RpcMessage> invoke(RequestScope& scope, const Invocation& inv) = 0;
  virtual std::vector<Result<RpcMessage>> invoke_parallel(RequestScope& scope,
                                                          const std::vector<Invocation>& invs) = 0;
};

// Strictly increasing ids per instance; the top 16 bits carry the instance id
// so distinct instances never collide.
class UniqueIdGen {
 public:
  explicit UniqueIdGen(uint16_t instance) : instance_(instance) {}
  uint64_t next() {
    return (static_cast<uint64_t>(instance_) << 48) |
           (ctr_.fetch_add(1, std::memory_order_relaxed) + 1);
  }
  uint16_t instance() const { return instance_; }

 private:
  uint16_t instance_;
  std::atomic<uint64_t> ctr_{0};
};

// Striped per-key mutexes; writers hold one across a read-modify-write cycle.
class KeyLocks {
 public:
  std::mutex& for_key(std::string_view key);

 private:
  static constexpr size_t kStripes = 64;
  std::array<std::mutex, kStripes> stripes_;
};

// Browse page sections in response-tag order.
struct SectionInfo {
  const char* method;
  const char* target;  // canonical hosting service
  const char* label;
};
const std::array<SectionInfo, 8>& page_sections();

// Resolved targets for cross-service calls, derived from the topology.
struct Routing {
  std::string cache_service;
  std::string store_service;
  std::string compose_page;
  std::string compose_review;
  std::string user_profile;
  std::array<std::string, 8> section_target;
  bool sections_parallel = true;
  bool review_fanout_parallel = true;
};
Routing build_routing(const ServiceTopology& topo);

// Mutable per-logical-service state, shared by that service's workers.
struct ServiceState {
  ServiceSpec spec;
  Routing routing;
  std::string dataset_dir;
  uint64_t chunk_bytes = 1ull << 20;
  std::atomic<double> slowdown{1.0};
  std::unique_ptr<UniqueIdGen> idgen;  // compose-review host only
  KeyLocks locks;
  LruByteCache* cache = nullptr;  // set when this service is the cache tier
  LogStore* store = nullptr;      // set when this service is the store tier
};

// Methods hosted by a service (role-driven for tiers, canonical-name-driven
// for application logic). Health and admin methods are implicit.
std::vector<std::string> hosted_methods(const ServiceSpec& spec);

// Executes one application method against the service's state.
Result<std::vector<Field>> app_dispatch(ServiceState& state, DataPlane& plane,
                                        RequestScope& scope, const RpcMessage& req);

// Field helpers shared with the load generator and tests.
std::string be64(uint64_t v);
Result<uint64_t> read_be64(const RpcMessage& msg, uint8_t tag);

RpcMessage make_browse_request(const TraceContext& ctx, uint64_t movie_id);
RpcMessage make_review_request(const TraceContext& ctx, uint64_t movie_id, uint64_t user_id,
                               uint8_t stars, std::string text);
RpcMessage make_rent_request(const TraceContext& ctx, uint64_t user_id, uint64_t movie_id,
                             uint64_t price);
RpcMessage make_chunk_request(const TraceContext& ctx, uint64_t movie_id, uint64_t index);

}  // namespace moviebench
