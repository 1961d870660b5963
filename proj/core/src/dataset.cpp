// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/dataset.hpp"

#include <errno.h>
#include <fcntl.h>
#include <string.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>

#include "moviebench/digest.hpp"
#include "moviebench/records.hpp"
#include "moviebench/rng.hpp"
#include "moviebench/store.hpp"
#include "moviebench/wire.hpp"

namespace moviebench {

namespace {

constexpr uint64_t kPlotMedian = 4096;
constexpr double kPlotSigma = 1.0;
constexpr uint64_t kSizeFloor = 64;
constexpr uint64_t kSizeCeil = 512ull << 10;
constexpr uint32_t kZipfMaxReviews = 200;
constexpr double kZipfS = 1.2;
constexpr size_t kRecommendTopK = 5;

uint64_t clamp_size(double v) {
  if (v < static_cast<double>(kSizeFloor)) return kSizeFloor;
  if (v > static_cast<double>(kSizeCeil)) return kSizeCeil;
  return static_cast<uint64_t>(v);
}

std::string random_text(Rng& rng, uint64_t len) {
  static const char alphabet[] =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 .,";
  std::string s;
  s.reserve(len);
  for (uint64_t i = 0; i < len; i++) {
    s.push_back(alphabet[rng.next_u64() % (sizeof(alphabet) - 1)]);
  }
  return s;
}

Error errno_error(Errc code, const std::string& what) {
  return Error{code, what + ": " + strerror(errno)};
}

// Streams deterministic pseudo-random bytes into a file and the checksum.
Status write_blob(const std::string& path, const std::string& ref, uint64_t size, uint64_t seed,
                  uint64_t* checksum) {
  FILE* f = fopen(path.c_str(), "wb");
  if (f == nullptr) return errno_error(Errc::io_error, "open blob " + path);
  Rng rng(mix64(seed) ^ fnv1a64(ref));
  std::string block;
  uint64_t left = size;
  while (left > 0) {
    size_t chunk = left < 8192 ? static_cast<size_t>(left) : 8192;
    block.clear();
    for (size_t i = 0; i < (chunk + 7) / 8; i++) put_u64_be(block, rng.next_u64());
    block.resize(chunk);
    if (fwrite(block.data(), 1, chunk, f) != chunk) {
      Errc code = (errno == ENOSPC) ? Errc::disk_full : Errc::io_error;
      fclose(f);
      return errno_error(code, "write blob " + path);
    }
    *checksum = fnv1a64(block, *checksum);
    left -= chunk;
  }
  if (fclose(f) != 0) return errno_error(Errc::io_error, "close blob " + path);
  return ok_status();
}

}  // namespace

std::string dataset_store_log(const std::string& dir) { return dir + "/records/store.log"; }

std::string dataset_blob_path(const std::string& dir, const std::string& ref) {
  return dir + "/blobs/" + ref;
}

std::string video_ref_for(uint64_t movie_id) { return "v" + std::to_string(movie_id); }

Result<DatasetManifest> generate_dataset(const DatasetOptions& opts) {
  if (opts.movies == 0) return Error{Errc::invalid_count, "movies must be >= 1"};
  if (opts.dir.empty()) return Error{Errc::invalid_argument, "dataset dir required"};

  std::error_code ec;
  std::filesystem::create_directories(opts.dir + "/records", ec);
  std::filesystem::create_directories(opts.dir + "/blobs", ec);
  if (ec) return Error{Errc::io_error, "create dataset dirs: " + ec.message()};

  DatasetManifest man;
  man.dir = opts.dir;
  man.movies = opts.movies;
  man.users = opts.users != 0 ? opts.users : std::max<uint64_t>(100, opts.movies / 4);
  man.seed = opts.seed;
  man.video_bytes = opts.video_bytes;
  man.checksum = 0xcbf29ce484222325ull;

  std::string log_path = dataset_store_log(opts.dir);
  ::remove(log_path.c_str());
  auto store = LogStore::open(log_path);
  if (!store) return store.error();

  uint64_t checksum = man.checksum;
  auto put = [&](const std::string& key, const std::string& value) -> Status {
    checksum = fnv1a64(key, checksum);
    checksum = fnv1a64(value, checksum);
    return store->put(key, value);
  };

  ZipfSampler zipf(kZipfMaxReviews, kZipfS);
  uint64_t next_review_id = 1;
  std::map<uint64_t, std::vector<uint64_t>> user_reviews;
  std::vector<std::pair<uint64_t, uint64_t>> rating_by_movie;  // (milli rating, id kept separately)
  rating_by_movie.reserve(opts.movies);
  std::vector<std::string> titles(opts.movies + 1);

  for (uint64_t id = 1; id <= opts.movies; id++) {
    Rng rng(mix64(opts.seed ^ (id * 0x51ed2701)));

    MovieRecord movie;
    movie.movie_id = id;
    movie.title = "Movie " + std::to_string(id) + " " + random_text(rng, 8);
    titles[id] = movie.title;
    size_t cast_n = 3 + rng.next_u64() % 8;
    for (size_t i = 0; i < cast_n; i++) {
      movie.cast.push_back("Actor " + random_text(rng, 10));
    }
    movie.plot_bytes = clamp_size(rng.lognormal(static_cast<double>(kPlotMedian), kPlotSigma));
    movie.video_ref = video_ref_for(id);
    movie.video_bytes = opts.video_bytes;

    // Seeded reviews.
    uint32_t n_reviews = zipf.sample(rng);
    ReviewsObject reviews_obj;
    RatingRecord rating;
    std::vector<Review> reviews;
    for (uint32_t k = 0; k < n_reviews; k++) {
      Review rv;
      rv.review_id = next_review_id++;
      rv.movie_id = id;
      rv.user_id = 1 + rng.next_u64() % man.users;
      rv.stars = static_cast<uint8_t>(1 + rng.next_u64() % 5);
      rv.text = random_text(rng, 32 + rng.next_u64() % 480);
      rv.created_at = 0;  // seeded reviews carry no wall-clock time
      rating.rating_sum += rv.stars;
      rating.rating_count++;
      movie.review_ids.push_back(rv.review_id);
      user_reviews[rv.user_id].push_back(rv.review_id);
      reviews.push_back(std::move(rv));
    }
    movie.rating_sum = rating.rating_sum;
    movie.rating_count = rating.rating_count;
    man.reviews += n_reviews;

    reviews_obj.total = rating.rating_count;
    for (auto it = reviews.rbegin(); it != reviews.rend() && reviews_obj.recent.size() < kMaxRecentReviews;
         ++it) {
      reviews_obj.recent.push_back(
          {it->review_id, it->user_id, it->stars, it->text.substr(0, kRecentReviewSnippet)});
    }

    // Photo blobs.
    PhotosObject photos;
    size_t n_photos = 1 + rng.next_u64() % 4;
    for (size_t k = 0; k < n_photos; k++) {
      PhotosObject::Entry e;
      e.ref = "p" + std::to_string(id) + "_" + std::to_string(k);
      e.bytes = clamp_size(rng.lognormal(static_cast<double>(kPlotMedian), kPlotSigma));
      e.digest = mix64(opts.seed ^ fnv1a64(e.ref));
      auto st = write_blob(dataset_blob_path(opts.dir, e.ref), e.ref, e.bytes, opts.seed, &checksum);
      if (!st) return st.error();
      man.blobs++;
      movie.photo_refs.push_back(e.ref);
      photos.photos.push_back(std::move(e));
    }

    // Video blob.
    auto st = write_blob(dataset_blob_path(opts.dir, movie.video_ref), movie.video_ref,
                         opts.video_bytes, opts.seed, &checksum);
    if (!st) return st.error();
    man.blobs++;

    std::string plot = random_text(rng, movie.plot_bytes);
    std::string thumb = random_text(rng, 512 + rng.next_u64() % 1536);

    if (auto s = put(movie_key(id), encode_movie(movie)); !s) return s.error();
    if (auto s = put(plot_key(id), plot); !s) return s.error();
    if (auto s = put(thumb_key(id), thumb); !s) return s.error();
    if (auto s = put(cast_key(id), encode_cast(CastList{movie.cast})); !s) return s.error();
    if (auto s = put(rating_key(id), encode_rating(rating)); !s) return s.error();
    if (auto s = put(reviews_key(id), encode_reviews_object(reviews_obj)); !s) return s.error();
    if (auto s = put(photos_key(id), encode_photos_object(photos)); !s) return s.error();
    if (auto s = put(videos_key(id), encode_video_info({movie.video_ref, opts.video_bytes})); !s) {
      return s.error();
    }
    for (const auto& rv : reviews) {
      if (auto s = put(review_key(rv.review_id), encode_review(rv)); !s) return s.error();
    }

    uint64_t milli = rating.rating_count == 0
                         ? 0
                         : rating.rating_sum * 1000 / rating.rating_count;
    rating_by_movie.emplace_back(milli, id);
  }

  // Users.
  for (uint64_t uid = 1; uid <= man.users; uid++) {
    Rng rng(mix64(opts.seed ^ (uid * 0x9132fa1b)));
    UserAccount u;
    u.user_id = uid;
    u.balance = 100 + rng.next_u64() % 900;
    auto it = user_reviews.find(uid);
    if (it != user_reviews.end()) u.review_ids = it->second;
    if (auto s = put(user_key(uid), encode_user(u)); !s) return s.error();
  }

  // Recommender stub: deterministic top-k by seeded rating.
  std::sort(rating_by_movie.begin(), rating_by_movie.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  RecommendList rec;
  for (size_t i = 0; i < rating_by_movie.size() && i < kRecommendTopK; i++) {
    uint64_t id = rating_by_movie[i].second;
    rec.top.push_back({id, titles[id], rating_by_movie[i].first});
  }
  if (auto s = put(recommend_key(), encode_recommend_list(rec)); !s) return s.error();

  man.checksum = checksum;

  // Manifest last, so a complete manifest implies a complete dataset.
  FILE* f = fopen((opts.dir + "/manifest").c_str(), "wb");
  if (f == nullptr) return errno_error(Errc::io_error, "open manifest");
  fprintf(f,
          "movies %" PRIu64 "\nusers %" PRIu64 "\nseed %" PRIu64 "\nvideo_bytes %" PRIu64
          "\nblobs %" PRIu64 "\nreviews %" PRIu64 "\nchecksum %016" PRIx64 "\n",
          man.movies, man.users, man.seed, man.video_bytes, man.blobs, man.reviews, man.checksum);
  if (fclose(f) != 0) return errno_error(Errc::io_error, "close manifest");
  return man;
}

Result<DatasetManifest> load_manifest(const std::string& dir) {
  FILE* f = fopen((dir + "/manifest").c_str(), "rb");
  if (f == nullptr) return Error{Errc::io_error, "no manifest under '" + dir + "'"};
  DatasetManifest man;
  man.dir = dir;
  char key[64];
  char value[64];
  int fields = 0;
  while (fscanf(f, "%63s %63s", key, value) == 2) {
    std::string k(key);
    if (k == "movies") man.movies = strtoull(value, nullptr, 10);
    else if (k == "users") man.users = strtoull(value, nullptr, 10);
    else if (k == "seed") man.seed = strtoull(value, nullptr, 10);
    else if (k == "video_bytes") man.video_bytes = strtoull(value, nullptr, 10);
    else if (k == "blobs") man.blobs = strtoull(value, nullptr, 10);
    else if (k == "reviews") man.reviews = strtoull(value, nullptr, 10);
    else if (k == "checksum") man.checksum = strtoull(value, nullptr, 16);
    else continue;
    fields++;
  }
  fclose(f);
  if (fields < 7 || man.movies == 0) return Error{Errc::corruption, "manifest incomplete"};
  return man;
}

Result<uint64_t> blob_size(const std::string& dir, const std::string& ref) {
  struct stat st{};
  if (stat(dataset_blob_path(dir, ref).c_str(), &st) != 0) {
    return Error{Errc::not_found, "blob '" + ref + "'"};
  }
  return static_cast<uint64_t>(st.st_size);
}

Result<std::string> read_blob_range(const std::string& dir, const std::string& ref,
                                    uint64_t offset, uint64_t len) {
  int fd = ::open(dataset_blob_path(dir, ref).c_str(), O_RDONLY);
  if (fd < 0) return Error{Errc::not_found, "blob '" + ref + "'"};
  std::string out(len, '\0');
  ssize_t n = pread(fd, out.data(), len, static_cast<off_t>(offset));
  ::close(fd);
  if (n < 0) return errno_error(Errc::io_error, "pread blob " + ref);
  out.resize(static_cast<size_t>(n));
  return out;
}

}  // namespace moviebench
