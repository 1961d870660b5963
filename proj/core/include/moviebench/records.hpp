// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moviebench/common.hpp"

namespace moviebench {

// Store keyspace. Each browse section reads exactly one object; writers own
// disjoint key families (rating: by the rating service, reviews:/movie: by
// movie-review, user: by user-profile).
//   movie:<id>      MovieRecord (no plot body)
//   plot:<id>       raw plot bytes
//   thumb:<id>      raw thumbnail bytes
//   cast:<id>       CastList
//   rating:<id>     RatingRecord
//   reviews:<id>    ReviewsObject (recent reviews, capped)
//   photos:<id>     PhotosObject
//   videos:<id>     VideoInfo
//   recommend:global RecommendList
//   review:<id>     Review
//   user:<id>       UserAccount

std::string movie_key(uint64_t id);
std::string plot_key(uint64_t id);
std::string thumb_key(uint64_t id);
std::string cast_key(uint64_t id);
std::string rating_key(uint64_t id);
std::string reviews_key(uint64_t id);
std::string photos_key(uint64_t id);
std::string videos_key(uint64_t id);
std::string review_key(uint64_t id);
std::string user_key(uint64_t id);
inline const char* recommend_key() { return "recommend:global"; }

struct MovieRecord {
  uint64_t movie_id = 0;
  std::string title;
  std::vector<std::string> cast;
  uint64_t plot_bytes = 0;
  std::vector<std::string> photo_refs;
  std::string video_ref;
  uint64_t video_bytes = 0;
  uint64_t rating_sum = 0;    // seeded copy; rating:<id> is authoritative
  uint64_t rating_count = 0;
  std::vector<uint64_t> review_ids;
};

struct RatingRecord {
  uint64_t rating_sum = 0;
  uint64_t rating_count = 0;
};

struct Review {
  uint64_t review_id = 0;
  uint64_t movie_id = 0;
  uint64_t user_id = 0;
  uint8_t stars = 0;
  std::string text;
  uint64_t created_at = 0;  // wall ns; stored, never returned in responses
};

struct ReviewsObject {
  uint64_t total = 0;
  // Most recent first, capped at kMaxRecentReviews.
  struct Entry {
    uint64_t review_id = 0;
    uint64_t user_id = 0;
    uint8_t stars = 0;
    std::string text;
  };
  std::vector<Entry> recent;
};
inline constexpr size_t kMaxRecentReviews = 10;
// Recent-review entries carry a text snippet, not the full body.
inline constexpr size_t kRecentReviewSnippet = 120;

struct PhotosObject {
  struct Entry {
    std::string ref;
    uint64_t bytes = 0;
    uint64_t digest = 0;
  };
  std::vector<Entry> photos;
};

struct VideoInfo {
  std::string video_ref;
  uint64_t total_bytes = 0;
};

struct RecommendList {
  struct Entry {
    uint64_t movie_id = 0;
    std::string title;
    uint64_t rating_milli = 0;  // average rating * 1000
  };
  std::vector<Entry> top;
};

struct UserAccount {
  uint64_t user_id = 0;
  uint64_t balance = 0;
  std::vector<uint64_t> review_ids;
};

struct StreamManifest {
  uint64_t movie_id = 0;
  uint64_t chunk_size = 0;
  uint64_t chunk_count = 0;
  uint64_t total_bytes = 0;
};

struct CastList {
  std::vector<std::string> names;
};

// Deterministic binary codecs (length-prefixed, big-endian).
std::string encode_movie(const MovieRecord&);
Result<MovieRecord> decode_movie(std::string_view);
std::string encode_rating(const RatingRecord&);
Result<RatingRecord> decode_rating(std::string_view);
std::string encode_review(const Review&);
Result<Review> decode_review(std::string_view);
std::string encode_reviews_object(const ReviewsObject&);
Result<ReviewsObject> decode_reviews_object(std::string_view);
std::string encode_photos_object(const PhotosObject&);
Result<PhotosObject> decode_photos_object(std::string_view);
std::string encode_video_info(const VideoInfo&);
Result<VideoInfo> decode_video_info(std::string_view);
std::string encode_recommend_list(const RecommendList&);
Result<RecommendList> decode_recommend_list(std::string_view);
std::string encode_user(const UserAccount&);
Result<UserAccount> decode_user(std::string_view);
std::string encode_cast(const CastList&);
Result<CastList> decode_cast(std::string_view);
std::string encode_manifest(const StreamManifest&);
Result<StreamManifest> decode_manifest(std::string_view);

}  // namespace moviebench
