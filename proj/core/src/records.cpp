// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/records.hpp"

#include "moviebench/wire.hpp"

namespace moviebench {

std::string movie_key(uint64_t id) { return "movie:" + std::to_string(id); }
std::string plot_key(uint64_t id) { return "plot:" + std::to_string(id); }
std::string thumb_key(uint64_t id) { return "thumb:" + std::to_string(id); }
std::string cast_key(uint64_t id) { return "cast:" + std::to_string(id); }
std::string rating_key(uint64_t id) { return "rating:" + std::to_string(id); }
std::string reviews_key(uint64_t id) { return "reviews:" + std::to_string(id); }
std::string photos_key(uint64_t id) { return "photos:" + std::to_string(id); }
std::string videos_key(uint64_t id) { return "videos:" + std::to_string(id); }
std::string review_key(uint64_t id) { return "review:" + std::to_string(id); }
std::string user_key(uint64_t id) { return "user:" + std::to_string(id); }

namespace {

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  bool u8(uint8_t* out) {
    if (pos_ + 1 > data_.size()) return false;
    *out = static_cast<uint8_t>(data_[pos_++]);
    return true;
  }
  bool u64(uint64_t* out) {
    if (pos_ + 8 > data_.size()) return false;
    *out = get_u64_be(reinterpret_cast<const unsigned char*>(data_.data() + pos_));
    pos_ += 8;
    return true;
  }
  bool str(std::string* out) {
    uint64_t len;
    if (!u64(&len)) return false;
    if (pos_ + len > data_.size()) return false;
    out->assign(data_.substr(pos_, len));
    pos_ += len;
    return true;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  size_t pos_ = 0;
};

void put_str(std::string& out, std::string_view s) {
  put_u64_be(out, s.size());
  out.append(s);
}

Error malformed(const char* what) { return Error{Errc::corruption, std::string("decode ") + what}; }

}  // namespace

std::string encode_movie(const MovieRecord& m) {
  std::string out;
  put_u64_be(out, m.movie_id);
  put_str(out, m.title);
  put_u64_be(out, m.cast.size());
  for (const auto& c : m.cast) put_str(out, c);
  put_u64_be(out, m.plot_bytes);
  put_u64_be(out, m.photo_refs.size());
  for (const auto& r : m.photo_refs) put_str(out, r);
  put_str(out, m.video_ref);
  put_u64_be(out, m.video_bytes);
  put_u64_be(out, m.rating_sum);
  put_u64_be(out, m.rating_count);
  put_u64_be(out, m.review_ids.size());
  for (uint64_t id : m.review_ids) put_u64_be(out, id);
  return out;
}

Result<MovieRecord> decode_movie(std::string_view data) {
  Reader r(data);
  MovieRecord m;
  uint64_t n = 0;
  if (!r.u64(&m.movie_id) || !r.str(&m.title) || !r.u64(&n)) return malformed("movie");
  m.cast.resize(n);
  for (auto& c : m.cast) {
    if (!r.str(&c)) return malformed("movie cast");
  }
  if (!r.u64(&m.plot_bytes) || !r.u64(&n)) return malformed("movie");
  m.photo_refs.resize(n);
  for (auto& p : m.photo_refs) {
    if (!r.str(&p)) return malformed("movie photos");
  }
  if (!r.str(&m.video_ref) || !r.u64(&m.video_bytes) || !r.u64(&m.rating_sum) ||
      !r.u64(&m.rating_count) || !r.u64(&n)) {
    return malformed("movie");
  }
  m.review_ids.resize(n);
  for (auto& id : m.review_ids) {
    if (!r.u64(&id)) return malformed("movie reviews");
  }
  if (!r.done()) return malformed("movie trailing");
  return m;
}

std::string encode_rating(const RatingRecord& rr) {
  std::string out;
  put_u64_be(out, rr.rating_sum);
  put_u64_be(out, rr.rating_count);
  return out;
}

Result<RatingRecord> decode_rating(std::string_view data) {
  Reader r(data);
  RatingRecord rr;
  if (!r.u64(&rr.rating_sum) || !r.u64(&rr.rating_count) || !r.done()) return malformed("rating");
  return rr;
}

std::string encode_review(const Review& rv) {
  std::string out;
  put_u64_be(out, rv.review_id);
  put_u64_be(out, rv.movie_id);
  put_u64_be(out, rv.user_id);
  out.push_back(static_cast<char>(rv.stars));
  put_str(out, rv.text);
  put_u64_be(out, rv.created_at);
  return out;
}

Result<Review> decode_review(std::string_view data) {
  Reader r(data);
  Review rv;
  if (!r.u64(&rv.review_id) || !r.u64(&rv.movie_id) || !r.u64(&rv.user_id) || !r.u8(&rv.stars) ||
      !r.str(&rv.text) || !r.u64(&rv.created_at) || !r.done()) {
    return malformed("review");
  }
  return rv;
}

std::string encode_reviews_object(const ReviewsObject& o) {
  std::string out;
  put_u64_be(out, o.total);
  put_u64_be(out, o.recent.size());
  for (const auto& e : o.recent) {
    put_u64_be(out, e.review_id);
    put_u64_be(out, e.user_id);
    out.push_back(static_cast<char>(e.stars));
    put_str(out, e.text);
  }
  return out;
}

Result<ReviewsObject> decode_reviews_object(std::string_view data) {
  Reader r(data);
  ReviewsObject o;
  uint64_t n = 0;
  if (!r.u64(&o.total) || !r.u64(&n)) return malformed("reviews");
  o.recent.resize(n);
  for (auto& e : o.recent) {
    if (!r.u64(&e.review_id) || !r.u64(&e.user_id) || !r.u8(&e.stars) || !r.str(&e.text)) {
      return malformed("reviews entry");
    }
  }
  if (!r.done()) return malformed("reviews trailing");
  return o;
}

std::string encode_photos_object(const PhotosObject& o) {
  std::string out;
  put_u64_be(out, o.photos.size());
  for (const auto& e : o.photos) {
    put_str(out, e.ref);
    put_u64_be(out, e.bytes);
    put_u64_be(out, e.digest);
  }
  return out;
}

Result<PhotosObject> decode_photos_object(std::string_view data) {
  Reader r(data);
  PhotosObject o;
  uint64_t n = 0;
  if (!r.u64(&n)) return malformed("photos");
  o.photos.resize(n);
  for (auto& e : o.photos) {
    if (!r.str(&e.ref) || !r.u64(&e.bytes) || !r.u64(&e.digest)) return malformed("photos entry");
  }
  if (!r.done()) return malformed("photos trailing");
  return o;
}

std::string encode_video_info(const VideoInfo& v) {
  std::string out;
  put_str(out, v.video_ref);
  put_u64_be(out, v.total_bytes);
  return out;
}

Result<VideoInfo> decode_video_info(std::string_view data) {
  Reader r(data);
  VideoInfo v;
  if (!r.str(&v.video_ref) || !r.u64(&v.total_bytes) || !r.done()) return malformed("video info");
  return v;
}

std::string encode_recommend_list(const RecommendList& l) {
  std::string out;
  put_u64_be(out, l.top.size());
  for (const auto& e : l.top) {
    put_u64_be(out, e.movie_id);
    put_str(out, e.title);
    put_u64_be(out, e.rating_milli);
  }
  return out;
}

Result<RecommendList> decode_recommend_list(std::string_view data) {
  Reader r(data);
  RecommendList l;
  uint64_t n = 0;
  if (!r.u64(&n)) return malformed("recommend");
  l.top.resize(n);
  for (auto& e : l.top) {
    if (!r.u64(&e.movie_id) || !r.str(&e.title) || !r.u64(&e.rating_milli)) {
      return malformed("recommend entry");
    }
  }
  if (!r.done()) return malformed("recommend trailing");
  return l;
}

std::string encode_user(const UserAccount& u) {
  std::string out;
  put_u64_be(out, u.user_id);
  put_u64_be(out, u.balance);
  put_u64_be(out, u.review_ids.size());
  for (uint64_t id : u.review_ids) put_u64_be(out, id);
  return out;
}

Result<UserAccount> decode_user(std::string_view data) {
  Reader r(data);
  UserAccount u;
  uint64_t n = 0;
  if (!r.u64(&u.user_id) || !r.u64(&u.balance) || !r.u64(&n)) return malformed("user");
  u.review_ids.resize(n);
  for (auto& id : u.review_ids) {
    if (!r.u64(&id)) return malformed("user reviews");
  }
  if (!r.done()) return malformed("user trailing");
  return u;
}

std::string encode_cast(const CastList& c) {
  std::string out;
  put_u64_be(out, c.names.size());
  for (const auto& nm : c.names) put_str(out, nm);
  return out;
}

Result<CastList> decode_cast(std::string_view data) {
  Reader r(data);
  CastList c;
  uint64_t n = 0;
  if (!r.u64(&n)) return malformed("cast");
  c.names.resize(n);
  for (auto& nm : c.names) {
    if (!r.str(&nm)) return malformed("cast entry");
  }
  if (!r.done()) return malformed("cast trailing");
  return c;
}

std::string encode_manifest(const StreamManifest& m) {
  std::string out;
  put_u64_be(out, m.movie_id);
  put_u64_be(out, m.chunk_size);
  put_u64_be(out, m.chunk_count);
  put_u64_be(out, m.total_bytes);
  return out;
}

Result<StreamManifest> decode_manifest(std::string_view data) {
  Reader r(data);
  StreamManifest m;
  if (!r.u64(&m.movie_id) || !r.u64(&m.chunk_size) || !r.u64(&m.chunk_count) ||
      !r.u64(&m.total_bytes) || !r.done()) {
    return malformed("manifest");
  }
  return m;
}

}  // namespace moviebench
