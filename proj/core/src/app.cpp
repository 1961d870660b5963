// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/app.hpp"

#include <algorithm>

#include "moviebench/compute.hpp"
#include "moviebench/dataset.hpp"
#include "moviebench/digest.hpp"

namespace moviebench {

std::mutex& KeyLocks::for_key(std::string_view key) {
  return stripes_[fnv1a64(key) % kStripes];
}

const std::array<SectionInfo, 8>& page_sections() {
  static const std::array<SectionInfo, 8> kSections = {{
      {methods::kPlot, "plot", "plot"},
      {methods::kThumbnail, "thumbnail", "thumbnail"},
      {methods::kRating, "rating", "rating"},
      {methods::kCastInfo, "cast-info", "cast_info"},
      {methods::kReviews, "movie-review", "reviews"},
      {methods::kPhotos, "photos", "photos"},
      {methods::kVideos, "videos", "videos"},
      {methods::kRecommend, "recommend", "recommendations"},
  }};
  return kSections;
}

Routing build_routing(const ServiceTopology& topo) {
  Routing r;
  for (const auto& s : topo.services) {
    if (s.role == ServiceRole::cache && r.cache_service.empty()) r.cache_service = s.name;
    if (s.role == ServiceRole::store && r.store_service.empty()) r.store_service = s.name;
  }
  auto present = [&](const char* name) -> std::string {
    return topo.find(name) != nullptr ? name : "";
  };
  r.compose_page = present("compose-page");
  r.compose_review = present("compose-review");
  r.user_profile = present("user-profile");
  const auto& sections = page_sections();
  for (size_t i = 0; i < sections.size(); i++) r.section_target[i] = present(sections[i].target);

  if (!r.compose_page.empty()) {
    for (const Edge* e : topo.out_edges(r.compose_page)) {
      if (e->mode == EdgeMode::serial) r.sections_parallel = false;
    }
  }
  if (!r.compose_review.empty()) {
    for (const Edge* e : topo.out_edges(r.compose_review)) {
      if (e->mode == EdgeMode::serial &&
          (e->callee == "movie-review" || e->callee == r.user_profile)) {
        r.review_fanout_parallel = false;
      }
    }
  }
  return r;
}

std::vector<std::string> hosted_methods(const ServiceSpec& spec) {
  std::vector<std::string> m;
  switch (spec.role) {
    case ServiceRole::cache:
      return {methods::kCacheGet, methods::kCachePut};
    case ServiceRole::store:
      return {methods::kStoreGet, methods::kStorePut};
    case ServiceRole::frontend:
      return {methods::kComposePage, methods::kComposeReview, methods::kUserAuth,
              methods::kRentChunk};
    case ServiceRole::blob:
      return {methods::kRentChunk};
    case ServiceRole::logic:
      break;
  }
  if (spec.name == "compose-page") return {methods::kComposePage};
  if (spec.name == "compose-review") {
    return {methods::kComposeReview, methods::kUniqueId, methods::kReviewStorage};
  }
  if (spec.name == "user-profile") return {methods::kUserAuth, methods::kUserReview};
  if (spec.name == "plot") return {methods::kPlot};
  if (spec.name == "thumbnail") return {methods::kThumbnail};
  if (spec.name == "rating") return {methods::kRating, methods::kUpdateMovie};
  if (spec.name == "cast-info") return {methods::kCastInfo};
  if (spec.name == "movie-review") return {methods::kReviews, methods::kMovieReview};
  if (spec.name == "photos") return {methods::kPhotos};
  if (spec.name == "videos") return {methods::kVideos};
  if (spec.name == "recommend") return {methods::kRecommend};
  return {};
}

std::string be64(uint64_t v) {
  std::string s;
  put_u64_be(s, v);
  return s;
}

Result<uint64_t> read_be64(const RpcMessage& msg, uint8_t tag) {
  const std::string* f = msg.field(tag);
  if (f == nullptr || f->size() != 8) {
    return Error{Errc::protocol_error, "missing u64 field " + std::to_string(tag)};
  }
  return get_u64_be(reinterpret_cast<const unsigned char*>(f->data()));
}

RpcMessage make_browse_request(const TraceContext& ctx, uint64_t movie_id) {
  RpcMessage m;
  m.kind = MsgKind::request;
  m.method = methods::kComposePage;
  m.context = ctx;
  m.add(0, be64(movie_id));
  return m;
}

RpcMessage make_review_request(const TraceContext& ctx, uint64_t movie_id, uint64_t user_id,
                               uint8_t stars, std::string text) {
  RpcMessage m;
  m.kind = MsgKind::request;
  m.method = methods::kComposeReview;
  m.context = ctx;
  m.add(0, be64(movie_id));
  m.add(1, be64(user_id));
  m.add(2, std::string(1, static_cast<char>(stars)));
  m.add(3, std::move(text));
  return m;
}

RpcMessage make_rent_request(const TraceContext& ctx, uint64_t user_id, uint64_t movie_id,
                             uint64_t price) {
  RpcMessage m;
  m.kind = MsgKind::request;
  m.method = methods::kUserAuth;
  m.context = ctx;
  m.add(0, be64(user_id));
  m.add(1, be64(movie_id));
  m.add(2, be64(price));
  return m;
}

RpcMessage make_chunk_request(const TraceContext& ctx, uint64_t movie_id, uint64_t index) {
  RpcMessage m;
  m.kind = MsgKind::request;
  m.method = methods::kRentChunk;
  m.context = ctx;
  m.add(0, be64(movie_id));
  m.add(1, be64(index));
  return m;
}

namespace {

double load_slowdown(const ServiceState& st) {
  double v = st.slowdown.load(std::memory_order_relaxed);
  return v > 0 ? v : 1.0;
}

uint64_t burn(const ServiceState& st, std::string_view payload) {
  return synthetic_compute(payload, st.spec.compute_cost, load_slowdown(st));
}

Result<RpcMessage> expect_ok(Result<RpcMessage> r, Errc transport_as) {
  if (!r.ok()) {
    Errc code = r.error().code;
    if (code == Errc::timeout) return r;  // timeouts propagate as themselves
    return Error{transport_as, r.error().to_string()};
  }
  return r;
}

// Cache-aside read: cache_get, on miss store_get then cache_put.
Result<std::optional<std::string>> data_get(ServiceState& st, DataPlane& plane,
                                            RequestScope& scope, const std::string& key) {
  if (!st.routing.cache_service.empty()) {
    Invocation inv{st.routing.cache_service, methods::kCacheGet, {}};
    inv.fields.push_back({0, key});
    auto r = plane.invoke(scope, inv);
    if (r.ok() && r->kind == MsgKind::response) {
      const std::string* found = r->field(0);
      if (found != nullptr && !found->empty() && (*found)[0] == 1) {
        const std::string* value = r->field(1);
        if (value != nullptr) return std::optional<std::string>(*value);
      }
    }
    // A cache failure degrades to the store path.
  }
  if (st.routing.store_service.empty()) {
    return Error{Errc::store_unavailable, "no store tier in topology"};
  }
  Invocation inv{st.routing.store_service, methods::kStoreGet, {}};
  inv.fields.push_back({0, key});
  auto r = plane.invoke(scope, inv);
  if (!r.ok()) return Error{Errc::store_unavailable, r.error().to_string()};
  if (r->kind == MsgKind::error) return r->as_error();
  const std::string* found = r->field(0);
  if (found == nullptr || found->empty() || (*found)[0] != 1) {
    return std::optional<std::string>{};
  }
  const std::string* value = r->field(1);
  if (value == nullptr) return Error{Errc::store_unavailable, "malformed StoreGet response"};
  std::optional<std::string> out(*value);

  if (!st.routing.cache_service.empty()) {
    Invocation put{st.routing.cache_service, methods::kCachePut, {}};
    put.fields.push_back({0, key});
    put.fields.push_back({1, *value});
    (void)plane.invoke(scope, put);  // best effort; oversize values just stay uncached
  }
  return out;
}

Status store_write(ServiceState& st, DataPlane& plane, RequestScope& scope,
                   const std::string& key, const std::string& value, bool write_through_cache) {
  if (st.routing.store_service.empty()) {
    return Error{Errc::store_unavailable, "no store tier in topology"};
  }
  Invocation inv{st.routing.store_service, methods::kStorePut, {}};
  inv.fields.push_back({0, key});
  inv.fields.push_back({1, value});
  auto r = plane.invoke(scope, inv);
  if (!r.ok()) return Error{Errc::store_unavailable, r.error().to_string()};
  if (r->kind == MsgKind::error) return r->as_error();
  if (write_through_cache && !st.routing.cache_service.empty()) {
    Invocation put{st.routing.cache_service, methods::kCachePut, {}};
    put.fields.push_back({0, key});
    put.fields.push_back({1, value});
    (void)plane.invoke(scope, put);
  }
  return ok_status();
}

// Authoritative read for read-modify-write cycles: always the store.
Result<std::optional<std::string>> store_read(ServiceState& st, DataPlane& plane,
                                              RequestScope& scope, const std::string& key) {
  if (st.routing.store_service.empty()) {
    return Error{Errc::store_unavailable, "no store tier in topology"};
  }
  Invocation inv{st.routing.store_service, methods::kStoreGet, {}};
  inv.fields.push_back({0, key});
  auto r = plane.invoke(scope, inv);
  if (!r.ok()) return Error{Errc::store_unavailable, r.error().to_string()};
  if (r->kind == MsgKind::error) return r->as_error();
  const std::string* found = r->field(0);
  if (found == nullptr || found->empty() || (*found)[0] != 1) {
    return std::optional<std::string>{};
  }
  const std::string* value = r->field(1);
  if (value == nullptr) return Error{Errc::store_unavailable, "malformed StoreGet response"};
  return std::optional<std::string>(*value);
}

std::vector<Field> ok_fields(std::string v0) {
  std::vector<Field> out;
  out.push_back({0, std::move(v0)});
  return out;
}

// --- section reads ---------------------------------------------------------

Result<std::vector<Field>> handle_section(ServiceState& st, DataPlane& plane, RequestScope& scope,
                                          const RpcMessage& req, const char* method) {
  std::string key;
  if (std::string_view(method) == methods::kRecommend) {
    key = recommend_key();
  } else {
    auto id = read_be64(req, 0);
    if (!id) return id.error();
    if (std::string_view(method) == methods::kPlot) key = plot_key(*id);
    else if (std::string_view(method) == methods::kThumbnail) key = thumb_key(*id);
    else if (std::string_view(method) == methods::kRating) key = rating_key(*id);
    else if (std::string_view(method) == methods::kCastInfo) key = cast_key(*id);
    else if (std::string_view(method) == methods::kReviews) key = reviews_key(*id);
    else if (std::string_view(method) == methods::kPhotos) key = photos_key(*id);
    else if (std::string_view(method) == methods::kVideos) key = videos_key(*id);
    else return Error{Errc::internal, "not a section method"};
  }
  auto value = data_get(st, plane, scope, key);
  if (!value.ok()) return value.error();
  if (!value->has_value()) return Error{Errc::not_found, key};
  uint64_t digest = burn(st, **value);
  return ok_fields(be64(digest) + **value);
}

// --- compose-page -----------------------------------------------------------

Result<std::vector<Field>> handle_compose_page(ServiceState& st, DataPlane& plane,
                                               RequestScope& scope, const RpcMessage& req) {
  auto id = read_be64(req, 0);
  if (!id) return id.error();

  const auto& sections = page_sections();
  std::vector<Invocation> invs;
  invs.reserve(sections.size());
  for (size_t i = 0; i < sections.size(); i++) {
    if (st.routing.section_target[i].empty()) {
      return Error{Errc::unknown_service, std::string("no host for ") + sections[i].method};
    }
    Invocation inv{st.routing.section_target[i], sections[i].method, {}};
    inv.fields.push_back({0, be64(*id)});
    invs.push_back(std::move(inv));
  }

  std::vector<Result<RpcMessage>> responses;
  if (st.routing.sections_parallel) {
    responses = plane.invoke_parallel(scope, invs);
  } else {
    responses.reserve(invs.size());
    for (const auto& inv : invs) responses.push_back(plane.invoke(scope, inv));
  }

  std::vector<Field> out;
  std::string all;
  size_t movie_scoped = 0;
  size_t movie_scoped_missing = 0;
  for (size_t i = 0; i < sections.size(); i++) {
    // Recommend reads a global object, so it cannot witness movie existence.
    bool scoped = std::string_view(sections[i].method) != methods::kRecommend;
    if (scoped) movie_scoped++;
    std::string value;
    if (!responses[i].ok()) {
      Errc code = responses[i].error().code;
      if (code != Errc::timeout) code = Errc::section_unavailable;
      value.push_back(1);
      value += errc_name(code);
      value += ':';
      value += sections[i].label;
    } else if (responses[i]->kind == MsgKind::error) {
      Error err = responses[i]->as_error();
      if (err.code == Errc::not_found && scoped) movie_scoped_missing++;
      value.push_back(1);
      value += errc_name(err.code);
      value += ':';
      value += sections[i].label;
    } else {
      const std::string* body = responses[i]->field(0);
      value.push_back(0);
      if (body != nullptr) value += *body;
    }
    all += value;
    out.push_back({static_cast<uint8_t>(i), std::move(value)});
  }
  if (movie_scoped_missing == movie_scoped) {
    return Error{Errc::not_found, "movie " + std::to_string(*id)};
  }
  uint64_t digest = burn(st, all);
  out.push_back({8, be64(digest)});
  return out;
}

// --- review chain -----------------------------------------------------------

Result<std::vector<Field>> handle_compose_review(ServiceState& st, DataPlane& plane,
                                                 RequestScope& scope, const RpcMessage& req) {
  auto movie = read_be64(req, 0);
  if (!movie) return movie.error();
  auto user = read_be64(req, 1);
  if (!user) return user.error();
  const std::string* stars_f = req.field(2);
  if (stars_f == nullptr || stars_f->size() != 1) {
    return Error{Errc::protocol_error, "missing stars field"};
  }
  uint8_t stars = static_cast<uint8_t>((*stars_f)[0]);
  if (stars < 1 || stars > 5) {
    return Error{Errc::invalid_stars, "stars " + std::to_string(stars)};
  }
  const std::string* text = req.field(3);
  if (text == nullptr) return Error{Errc::protocol_error, "missing text field"};

  // Movie must exist before anything is written.
  auto movie_rec = data_get(st, plane, scope, movie_key(*movie));
  if (!movie_rec.ok()) return movie_rec.error();
  if (!movie_rec->has_value()) return Error{Errc::not_found, "movie " + std::to_string(*movie)};

  if (st.idgen == nullptr) return Error{Errc::internal, "compose-review without id generator"};
  uint64_t rid = st.idgen->next();

  Review rv;
  rv.review_id = rid;
  rv.movie_id = *movie;
  rv.user_id = *user;
  rv.stars = stars;
  rv.text = *text;
  rv.created_at = wall_now_ns();

  // ReviewStorage module: persist the review body.
  auto st1 = store_write(st, plane, scope, review_key(rid), encode_review(rv), false);
  if (!st1) return st1.error();

  // Propagate to the movie and user index managers.
  std::vector<Invocation> invs;
  {
    Invocation inv{"movie-review", methods::kMovieReview, {}};
    inv.fields.push_back({0, be64(*movie)});
    inv.fields.push_back({1, be64(rid)});
    inv.fields.push_back({2, be64(*user)});
    inv.fields.push_back({3, std::string(1, static_cast<char>(stars))});
    inv.fields.push_back({4, *text});
    invs.push_back(std::move(inv));
  }
  {
    Invocation inv{st.routing.user_profile, methods::kUserReview, {}};
    inv.fields.push_back({0, be64(*user)});
    inv.fields.push_back({1, be64(rid)});
    invs.push_back(std::move(inv));
  }
  if (invs[1].target.empty()) return Error{Errc::unknown_service, "no user-profile service"};

  std::vector<Result<RpcMessage>> rs;
  if (st.routing.review_fanout_parallel) {
    rs = plane.invoke_parallel(scope, invs);
  } else {
    for (const auto& inv : invs) rs.push_back(plane.invoke(scope, inv));
  }
  for (auto& r : rs) {
    auto checked = expect_ok(std::move(r), Errc::store_unavailable);
    if (!checked.ok()) return checked.error();
    if (checked->kind == MsgKind::error) return checked->as_error();
  }

  burn(st, rv.text);
  return ok_fields(be64(rid));
}

Result<std::vector<Field>> handle_movie_review(ServiceState& st, DataPlane& plane,
                                               RequestScope& scope, const RpcMessage& req) {
  auto movie = read_be64(req, 0);
  if (!movie) return movie.error();
  auto rid = read_be64(req, 1);
  if (!rid) return rid.error();
  auto user = read_be64(req, 2);
  if (!user) return user.error();
  const std::string* stars_f = req.field(3);
  const std::string* text = req.field(4);
  if (stars_f == nullptr || stars_f->size() != 1 || text == nullptr) {
    return Error{Errc::protocol_error, "malformed MovieReview"};
  }
  uint8_t stars = static_cast<uint8_t>((*stars_f)[0]);

  {
    std::lock_guard<std::mutex> lock(st.locks.for_key("movie:" + std::to_string(*movie)));

    auto movie_raw = store_read(st, plane, scope, movie_key(*movie));
    if (!movie_raw.ok()) return movie_raw.error();
    if (!movie_raw->has_value()) return Error{Errc::not_found, "movie " + std::to_string(*movie)};
    auto rec = decode_movie(**movie_raw);
    if (!rec.ok()) return rec.error();
    rec->review_ids.push_back(*rid);
    auto w = store_write(st, plane, scope, movie_key(*movie), encode_movie(*rec), true);
    if (!w) return w.error();

    auto reviews_raw = store_read(st, plane, scope, reviews_key(*movie));
    if (!reviews_raw.ok()) return reviews_raw.error();
    ReviewsObject obj;
    if (reviews_raw->has_value()) {
      auto decoded = decode_reviews_object(**reviews_raw);
      if (!decoded.ok()) return decoded.error();
      obj = std::move(*decoded);
    }
    obj.total++;
    std::string snippet = text->substr(0, kRecentReviewSnippet);
    obj.recent.insert(obj.recent.begin(), {*rid, *user, stars, std::move(snippet)});
    if (obj.recent.size() > kMaxRecentReviews) obj.recent.resize(kMaxRecentReviews);
    w = store_write(st, plane, scope, reviews_key(*movie), encode_reviews_object(obj), true);
    if (!w) return w.error();
  }

  // Update the movie statistics via the rating manager.
  Invocation inv{"rating", methods::kUpdateMovie, {}};
  inv.fields.push_back({0, be64(*movie)});
  inv.fields.push_back({1, std::string(1, static_cast<char>(stars))});
  auto r = expect_ok(plane.invoke(scope, inv), Errc::store_unavailable);
  if (!r.ok()) return r.error();
  if (r->kind == MsgKind::error) return r->as_error();

  burn(st, *text);
  return ok_fields("OK");
}

Result<std::vector<Field>> handle_update_movie(ServiceState& st, DataPlane& plane,
                                               RequestScope& scope, const RpcMessage& req) {
  auto movie = read_be64(req, 0);
  if (!movie) return movie.error();
  const std::string* stars_f = req.field(1);
  if (stars_f == nullptr || stars_f->size() != 1) {
    return Error{Errc::protocol_error, "malformed UpdateMovie"};
  }
  uint8_t stars = static_cast<uint8_t>((*stars_f)[0]);

  std::lock_guard<std::mutex> lock(st.locks.for_key("rating:" + std::to_string(*movie)));
  auto raw = store_read(st, plane, scope, rating_key(*movie));
  if (!raw.ok()) return raw.error();
  if (!raw->has_value()) return Error{Errc::not_found, "movie " + std::to_string(*movie)};
  auto rec = decode_rating(**raw);
  if (!rec.ok()) return rec.error();
  rec->rating_sum += stars;
  rec->rating_count++;
  std::string encoded = encode_rating(*rec);
  auto w = store_write(st, plane, scope, rating_key(*movie), encoded, true);
  if (!w) return w.error();
  burn(st, encoded);
  return ok_fields("OK");
}

Result<std::vector<Field>> handle_user_review(ServiceState& st, DataPlane& plane,
                                              RequestScope& scope, const RpcMessage& req) {
  auto user = read_be64(req, 0);
  if (!user) return user.error();
  auto rid = read_be64(req, 1);
  if (!rid) return rid.error();

  std::lock_guard<std::mutex> lock(st.locks.for_key("user:" + std::to_string(*user)));
  auto raw = store_read(st, plane, scope, user_key(*user));
  if (!raw.ok()) return raw.error();
  if (!raw->has_value()) return Error{Errc::not_found, "user " + std::to_string(*user)};
  auto rec = decode_user(**raw);
  if (!rec.ok()) return rec.error();
  rec->review_ids.push_back(*rid);
  std::string encoded = encode_user(*rec);
  auto w = store_write(st, plane, scope, user_key(*user), encoded, true);
  if (!w) return w.error();
  burn(st, encoded);
  return ok_fields("OK");
}

Result<std::vector<Field>> handle_user_auth_debit(ServiceState& st, DataPlane& plane,
                                                  RequestScope& scope, const RpcMessage& req) {
  auto user = read_be64(req, 0);
  if (!user) return user.error();
  auto price = read_be64(req, 1);
  if (!price) return price.error();

  std::lock_guard<std::mutex> lock(st.locks.for_key("user:" + std::to_string(*user)));
  auto raw = store_read(st, plane, scope, user_key(*user));
  if (!raw.ok()) return raw.error();
  if (!raw->has_value()) return Error{Errc::not_found, "user " + std::to_string(*user)};
  auto rec = decode_user(**raw);
  if (!rec.ok()) return rec.error();
  if (rec->balance < *price) {
    return Error{Errc::insufficient_funds,
                 "balance " + std::to_string(rec->balance) + " < " + std::to_string(*price)};
  }
  rec->balance -= *price;
  std::string encoded = encode_user(*rec);
  auto w = store_write(st, plane, scope, user_key(*user), encoded, true);
  if (!w) return w.error();
  burn(st, encoded);
  return ok_fields(be64(rec->balance));
}

// --- frontend ---------------------------------------------------------------

Result<std::vector<Field>> proxy(ServiceState& st, DataPlane& plane, RequestScope& scope,
                                 const RpcMessage& req, const std::string& target) {
  if (target.empty()) {
    return Error{Errc::unknown_service, "no downstream host for " + req.method};
  }
  std::string req_bytes;
  for (const auto& f : req.fields) req_bytes += f.value;
  burn(st, req_bytes);

  Invocation inv{target, req.method, req.fields};
  auto r = plane.invoke(scope, inv);
  if (!r.ok()) return r.error();
  if (r->kind == MsgKind::error) return r->as_error();

  std::string resp_bytes;
  for (const auto& f : r->fields) resp_bytes += f.value;
  burn(st, resp_bytes);
  return std::move(r->fields);
}

Result<std::vector<Field>> handle_rent_init(ServiceState& st, DataPlane& plane,
                                            RequestScope& scope, const RpcMessage& req) {
  auto user = read_be64(req, 0);
  if (!user) return user.error();
  auto movie = read_be64(req, 1);
  if (!movie) return movie.error();
  auto price = read_be64(req, 2);
  if (!price) return price.error();

  if (st.routing.user_profile.empty()) {
    return Error{Errc::unknown_service, "no user-profile service"};
  }
  Invocation auth{st.routing.user_profile, methods::kUserAuth, {}};
  auth.fields.push_back({0, be64(*user)});
  auth.fields.push_back({1, be64(*price)});
  auto r = expect_ok(plane.invoke(scope, auth), Errc::store_unavailable);
  if (!r.ok()) return r.error();
  if (r->kind == MsgKind::error) return r->as_error();

  auto info_raw = data_get(st, plane, scope, videos_key(*movie));
  if (!info_raw.ok()) return info_raw.error();
  if (!info_raw->has_value()) return Error{Errc::not_found, "movie " + std::to_string(*movie)};
  auto info = decode_video_info(**info_raw);
  if (!info.ok()) return info.error();

  StreamManifest man;
  man.movie_id = *movie;
  man.chunk_size = st.chunk_bytes;
  man.total_bytes = info->total_bytes;
  man.chunk_count = (info->total_bytes + st.chunk_bytes - 1) / st.chunk_bytes;
  if (man.chunk_count == 0) man.chunk_count = 1;
  std::string encoded = encode_manifest(man);
  burn(st, encoded);
  return ok_fields(std::move(encoded));
}

Result<std::vector<Field>> handle_rent_chunk(ServiceState& st, DataPlane& plane,
                                             RequestScope& scope, const RpcMessage& req) {
  auto movie = read_be64(req, 0);
  if (!movie) return movie.error();
  auto index = read_be64(req, 1);
  if (!index) return index.error();

  auto info_raw = data_get(st, plane, scope, videos_key(*movie));
  if (!info_raw.ok()) return info_raw.error();
  if (!info_raw->has_value()) return Error{Errc::not_found, "movie " + std::to_string(*movie)};
  auto info = decode_video_info(**info_raw);
  if (!info.ok()) return info.error();

  uint64_t chunk = st.chunk_bytes;
  uint64_t offset = *index * chunk;
  if (offset >= info->total_bytes) {
    return Error{Errc::not_found, "chunk " + std::to_string(*index)};
  }
  uint64_t len = std::min(chunk, info->total_bytes - offset);
  auto bytes = read_blob_range(st.dataset_dir, info->video_ref, offset, len);
  if (!bytes.ok()) return bytes.error();
  // Streaming is I/O work; no synthetic compute on the chunk path.
  return ok_fields(std::move(*bytes));
}

// --- tiers ------------------------------------------------------------------

Result<std::vector<Field>> handle_cache_get(ServiceState& st, const RpcMessage& req) {
  if (st.cache == nullptr) return Error{Errc::internal, "no cache backing"};
  const std::string* key = req.field(0);
  if (key == nullptr) return Error{Errc::protocol_error, "CacheGet without key"};
  auto value = st.cache->get(*key);
  std::vector<Field> out;
  if (value.has_value()) {
    burn(st, *value);
    out.push_back({0, std::string(1, 1)});
    out.push_back({1, std::move(*value)});
  } else {
    out.push_back({0, std::string(1, 0)});
  }
  return out;
}

Result<std::vector<Field>> handle_cache_put(ServiceState& st, const RpcMessage& req) {
  if (st.cache == nullptr) return Error{Errc::internal, "no cache backing"};
  const std::string* key = req.field(0);
  const std::string* value = req.field(1);
  if (key == nullptr || value == nullptr) {
    return Error{Errc::protocol_error, "CachePut needs key and value"};
  }
  burn(st, *value);
  auto s = st.cache->put(*key, *value);
  if (!s) return s.error();
  return ok_fields("OK");
}

// The store tier models an I/O-bound database: its per-byte cost is blocking
// device time on the worker, not CPU work, and it does not scale with the
// frequency-emulating slowdown factor. Device time degrades with the store's
// own backlog (lock convoys, IO amplification), which is what shifts the
// bottleneck toward the backend as load rises.
void store_device_wait(const ServiceState& st, const RequestScope& scope, size_t bytes) {
  size_t depth = scope.queue_depth;
  if (depth > 8) depth = 8;
  double ns = static_cast<double>(bytes) * st.spec.compute_cost *
              (1.0 + static_cast<double>(depth));
  if (ns > 0) sleep_ns(static_cast<uint64_t>(ns));
}

Result<std::vector<Field>> handle_store_get(ServiceState& st, const RequestScope& scope,
                                            const RpcMessage& req) {
  if (st.store == nullptr) return Error{Errc::internal, "no store backing"};
  const std::string* key = req.field(0);
  if (key == nullptr) return Error{Errc::protocol_error, "StoreGet without key"};
  auto value = st.store->get(*key);
  if (!value.ok()) return value.error();
  std::vector<Field> out;
  if (value->has_value()) {
    store_device_wait(st, scope, (*value)->size());
    out.push_back({0, std::string(1, 1)});
    out.push_back({1, std::move(**value)});
  } else {
    out.push_back({0, std::string(1, 0)});
  }
  return out;
}

Result<std::vector<Field>> handle_store_put(ServiceState& st, const RequestScope& scope,
                                            const RpcMessage& req) {
  if (st.store == nullptr) return Error{Errc::internal, "no store backing"};
  const std::string* key = req.field(0);
  const std::string* value = req.field(1);
  if (key == nullptr || value == nullptr) {
    return Error{Errc::protocol_error, "StorePut needs key and value"};
  }
  store_device_wait(st, scope, value->size());
  auto s = st.store->put(*key, *value);
  if (!s) return s.error();
  return ok_fields("OK");
}

}  // namespace

Result<std::vector<Field>> app_dispatch(ServiceState& st, DataPlane& plane, RequestScope& scope,
                                        const RpcMessage& req) {
  const std::string& m = req.method;
  switch (st.spec.role) {
    case ServiceRole::cache:
      if (m == methods::kCacheGet) return handle_cache_get(st, req);
      if (m == methods::kCachePut) return handle_cache_put(st, req);
      break;
    case ServiceRole::store:
      if (m == methods::kStoreGet) return handle_store_get(st, scope, req);
      if (m == methods::kStorePut) return handle_store_put(st, scope, req);
      break;
    case ServiceRole::frontend:
      if (m == methods::kComposePage) return proxy(st, plane, scope, req, st.routing.compose_page);
      if (m == methods::kComposeReview) {
        return proxy(st, plane, scope, req, st.routing.compose_review);
      }
      if (m == methods::kUserAuth) return handle_rent_init(st, plane, scope, req);
      if (m == methods::kRentChunk) return handle_rent_chunk(st, plane, scope, req);
      break;
    case ServiceRole::blob:
      if (m == methods::kRentChunk) return handle_rent_chunk(st, plane, scope, req);
      break;
    case ServiceRole::logic:
      break;
  }
  if (st.spec.name == "compose-page" && m == methods::kComposePage) {
    return handle_compose_page(st, plane, scope, req);
  }
  if (st.spec.name == "compose-review") {
    if (m == methods::kComposeReview) return handle_compose_review(st, plane, scope, req);
    if (m == methods::kUniqueId) {
      if (st.idgen == nullptr) return Error{Errc::internal, "no id generator"};
      return ok_fields(be64(st.idgen->next()));
    }
    if (m == methods::kReviewStorage) {
      const std::string* body = req.field(0);
      if (body == nullptr) return Error{Errc::protocol_error, "ReviewStorage without body"};
      auto rv = decode_review(*body);
      if (!rv.ok()) return rv.error();
      auto w = store_write(st, plane, scope, review_key(rv->review_id), *body, false);
      if (!w) return w.error();
      return ok_fields("OK");
    }
  }
  if (st.spec.name == "user-profile") {
    if (m == methods::kUserAuth) return handle_user_auth_debit(st, plane, scope, req);
    if (m == methods::kUserReview) return handle_user_review(st, plane, scope, req);
  }
  if (st.spec.name == "movie-review") {
    if (m == methods::kReviews) return handle_section(st, plane, scope, req, methods::kReviews);
    if (m == methods::kMovieReview) return handle_movie_review(st, plane, scope, req);
  }
  if (st.spec.name == "rating") {
    if (m == methods::kRating) return handle_section(st, plane, scope, req, methods::kRating);
    if (m == methods::kUpdateMovie) return handle_update_movie(st, plane, scope, req);
  }
  if (st.spec.name == "plot" && m == methods::kPlot) {
    return handle_section(st, plane, scope, req, methods::kPlot);
  }
  if (st.spec.name == "thumbnail" && m == methods::kThumbnail) {
    return handle_section(st, plane, scope, req, methods::kThumbnail);
  }
  if (st.spec.name == "cast-info" && m == methods::kCastInfo) {
    return handle_section(st, plane, scope, req, methods::kCastInfo);
  }
  if (st.spec.name == "photos" && m == methods::kPhotos) {
    return handle_section(st, plane, scope, req, methods::kPhotos);
  }
  if (st.spec.name == "videos" && m == methods::kVideos) {
    return handle_section(st, plane, scope, req, methods::kVideos);
  }
  if (st.spec.name == "recommend" && m == methods::kRecommend) {
    return handle_section(st, plane, scope, req, methods::kRecommend);
  }
  return Error{Errc::protocol_error, "method " + m + " not hosted by " + st.spec.name};
}

}  // namespace moviebench
