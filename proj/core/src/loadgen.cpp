// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/loadgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "moviebench/app.hpp"
#include "moviebench/records.hpp"
#include "moviebench/rng.hpp"
#include "moviebench/rpc_client.hpp"

namespace moviebench {

Status RequestMix::validate() const {
  if (browse < 0 || review < 0 || rent < 0) {
    return Error{Errc::invalid_argument, "negative mix weight"};
  }
  double sum = browse + review + rent;
  if (std::abs(sum - 1.0) > 1e-9) {
    return Error{Errc::invalid_argument, "mix weights sum to " + std::to_string(sum)};
  }
  return ok_status();
}

Result<RequestMix> RequestMix::parse(std::string_view text) {
  RequestMix mix{0, 0, 0};
  size_t pos = 0;
  while (pos < text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view part = text.substr(pos, comma - pos);
    pos = comma + 1;
    size_t eq = part.find('=');
    if (eq == std::string_view::npos) {
      return Error{Errc::invalid_argument, "mix needs name=weight pairs"};
    }
    std::string_view name = part.substr(0, eq);
    double w = strtod(std::string(part.substr(eq + 1)).c_str(), nullptr);
    if (name == "browse") mix.browse = w;
    else if (name == "review") mix.review = w;
    else if (name == "rent") mix.rent = w;
    else return Error{Errc::invalid_argument, "unknown mix component '" + std::string(name) + "'"};
  }
  auto st = mix.validate();
  if (!st) return st.error();
  return mix;
}

std::vector<ScheduledSend> build_schedule(const LoadOptions& opts) {
  std::vector<ScheduledSend> out;
  if (opts.rate_qps <= 0 || opts.duration_ns == 0) return out;

  Rng arrivals(mix64(opts.seed ^ 0xa11ce5));
  Rng draws(mix64(opts.seed ^ 0xd4a75));
  double gap_ns = 1e9 / opts.rate_qps;
  double t_ns = opts.arrival == Arrival::uniform ? 0.0 : arrivals.exponential(gap_ns);
  for (;;) {
    if (t_ns >= static_cast<double>(opts.duration_ns)) break;

    ScheduledSend s;
    s.at_ns = static_cast<uint64_t>(t_ns);
    double u = draws.next_double();
    if (u < opts.mix.browse) {
      s.type = RequestType::browse;
    } else if (u < opts.mix.browse + opts.mix.review) {
      s.type = RequestType::review;
    } else {
      s.type = RequestType::rent;
    }
    s.movie_id = opts.movies > 0 ? draws.uniform(1, opts.movies) : 1;
    s.user_id = opts.users > 0 ? draws.uniform(1, opts.users) : 1;
    s.stars = static_cast<uint8_t>(1 + draws.next_u64() % 5);
    s.text_len = static_cast<uint32_t>(64 + draws.next_u64() % 448);
    out.push_back(s);

    t_ns += opts.arrival == Arrival::uniform ? gap_ns : arrivals.exponential(gap_ns);
  }
  return out;
}

namespace {

struct WorkerTotals {
  LatencyHistogram all, browse, review, rent;
  uint64_t ok = 0, errors = 0, timeouts = 0, shed = 0;
  uint64_t ok_in_window = 0;
  uint64_t rpc_total = 0, rpc_ok = 0;
  std::vector<uint64_t> lags;
};

enum class FlowOutcome { ok, error, timeout, shed };

struct FlowResult {
  FlowOutcome outcome = FlowOutcome::ok;
  uint64_t rpcs = 0;
  uint64_t rpcs_ok = 0;
};

FlowOutcome classify(const Result<RpcMessage>& r) {
  if (!r.ok()) {
    return r.error().code == Errc::timeout ? FlowOutcome::timeout : FlowOutcome::error;
  }
  if (r->kind != MsgKind::error) return FlowOutcome::ok;
  Errc code = r->as_error().code;
  if (code == Errc::shed) return FlowOutcome::shed;
  if (code == Errc::timeout) return FlowOutcome::timeout;
  return FlowOutcome::error;
}

FlowResult run_flow(Channel& ch, IdSource& ids, const ScheduledSend& s, const LoadOptions& opts,
                    Rng& text_rng) {
  FlowResult fr;
  CallOptions copts;
  copts.timeout_ns = opts.timeout_ns;
  copts.max_frame = opts.max_frame;

  auto one = [&](const RpcMessage& req) -> FlowOutcome {
    fr.rpcs++;
    auto r = ch.call(req, copts);
    FlowOutcome o = classify(r);
    if (o == FlowOutcome::ok) fr.rpcs_ok++;
    return o;
  };

  switch (s.type) {
    case RequestType::browse: {
      fr.outcome = one(make_browse_request(root_context(ids), s.movie_id));
      return fr;
    }
    case RequestType::review: {
      std::string text(s.text_len, 'a');
      for (auto& c : text) c = static_cast<char>('a' + text_rng.next_u64() % 26);
      fr.outcome = one(make_review_request(root_context(ids), s.movie_id, s.user_id, s.stars,
                                           std::move(text)));
      return fr;
    }
    case RequestType::rent: {
      fr.rpcs++;
      auto r = ch.call(make_rent_request(root_context(ids), s.user_id, s.movie_id,
                                         opts.rent_price),
                       copts);
      FlowOutcome o = classify(r);
      if (o != FlowOutcome::ok) {
        fr.outcome = o;
        return fr;
      }
      fr.rpcs_ok++;
      const std::string* body = r->field(0);
      if (body == nullptr) {
        fr.outcome = FlowOutcome::error;
        return fr;
      }
      auto man = decode_manifest(*body);
      if (!man.ok()) {
        fr.outcome = FlowOutcome::error;
        return fr;
      }
      for (uint64_t i = 0; i < man->chunk_count; i++) {
        FlowOutcome co = one(make_chunk_request(root_context(ids), s.movie_id, i));
        if (co != FlowOutcome::ok) {
          fr.outcome = co;
          return fr;
        }
      }
      fr.outcome = FlowOutcome::ok;
      return fr;
    }
  }
  fr.outcome = FlowOutcome::error;
  return fr;
}

}  // namespace

Result<RunResult> run_load(const LoadOptions& opts) {
  auto mix_ok = opts.mix.validate();
  if (!mix_ok) return mix_ok.error();
  if (opts.rate_qps < 0) return Error{Errc::invalid_argument, "negative rate"};
  if (opts.duration_ns == 0 && opts.rate_qps > 0) {
    return Error{Errc::invalid_argument, "duration must be > 0"};
  }

  RunResult result;
  result.offered_qps = opts.rate_qps;
  uint64_t warmup = std::min(opts.warmup_ns, opts.duration_ns);
  result.window_ns = opts.duration_ns - warmup;
  if (opts.rate_qps == 0) return result;

  // Fail fast before scheduling anything.
  {
    auto probe = TcpConn::connect(opts.entry, 1000000000ull);
    if (!probe) return Error{Errc::entry_unreachable, probe.error().to_string()};
  }

  std::vector<ScheduledSend> schedule = build_schedule(opts);
  int workers = std::max(1, opts.workers);

  std::atomic<size_t> next{0};
  std::vector<WorkerTotals> totals(static_cast<size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  uint64_t t0 = mono_now_ns();

  for (int w = 0; w < workers; w++) {
    threads.emplace_back([&, w] {
      WorkerTotals& mine = totals[static_cast<size_t>(w)];
      IdSource ids;
      Rng text_rng(mix64(opts.seed ^ (0x777 + static_cast<uint64_t>(w))));
      Channel ch(opts.entry, "client", opts.recorder);
      for (;;) {
        size_t i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= schedule.size()) return;
        const ScheduledSend& s = schedule[i];
        uint64_t sched_abs = t0 + s.at_ns;
        uint64_t now = mono_now_ns();
        if (now < sched_abs) {
          sleep_ns(sched_abs - now);
          now = mono_now_ns();
        }
        bool measured = s.at_ns >= warmup;

        // A send that is already past the client deadline when its slot comes
        // up would time out anyway; count it at its schedule-relative latency
        // without occupying the connection (keeps the backlog draining at
        // timeout speed instead of compounding).
        if (now - sched_abs > opts.timeout_ns) {
          if (measured) {
            mine.timeouts++;
            uint64_t v = now - sched_abs;
            mine.all.record(v);
            if (s.type == RequestType::browse) mine.browse.record(v);
            if (s.type == RequestType::review) mine.review.record(v);
            if (s.type == RequestType::rent) mine.rent.record(v);
          }
          continue;
        }
        if (measured) mine.lags.push_back(now > sched_abs ? now - sched_abs : 0);

        FlowResult fr = run_flow(ch, ids, s, opts, text_rng);
        uint64_t done = mono_now_ns();
        uint64_t latency = done > sched_abs ? done - sched_abs : 0;
        mine.rpc_total += fr.rpcs;
        mine.rpc_ok += fr.rpcs_ok;
        if (!measured) continue;
        switch (fr.outcome) {
          case FlowOutcome::ok: {
            mine.ok++;
            if (done <= t0 + opts.duration_ns) mine.ok_in_window++;
            mine.all.record(latency);
            if (s.type == RequestType::browse) mine.browse.record(latency);
            if (s.type == RequestType::review) mine.review.record(latency);
            if (s.type == RequestType::rent) mine.rent.record(latency);
            break;
          }
          case FlowOutcome::timeout: {
            mine.timeouts++;
            uint64_t v = std::max(latency, opts.timeout_ns);
            mine.all.record(v);
            if (s.type == RequestType::browse) mine.browse.record(v);
            if (s.type == RequestType::review) mine.review.record(v);
            if (s.type == RequestType::rent) mine.rent.record(v);
            break;
          }
          case FlowOutcome::shed:
            mine.shed++;
            break;
          case FlowOutcome::error:
            mine.errors++;
            break;
        }
      }
    });
  }
  for (auto& t : threads) t.join();

  std::vector<uint64_t> lags;
  for (auto& w : totals) {
    (void)result.all.merge(w.all);
    (void)result.browse.merge(w.browse);
    (void)result.review.merge(w.review);
    (void)result.rent.merge(w.rent);
    result.ok += w.ok;
    result.ok_in_window += w.ok_in_window;
    result.errors += w.errors;
    result.timeouts += w.timeouts;
    result.shed += w.shed;
    result.rpc_total += w.rpc_total;
    result.rpc_ok += w.rpc_ok;
    lags.insert(lags.end(), w.lags.begin(), w.lags.end());
  }
  for (const auto& s : schedule) {
    if (s.at_ns >= warmup) result.scheduled++;
  }
  if (!lags.empty()) {
    std::sort(lags.begin(), lags.end());
    result.lag_max_ns = lags.back();
    size_t idx = static_cast<size_t>(std::ceil(0.99 * static_cast<double>(lags.size())));
    if (idx == 0) idx = 1;
    result.lag_p99_ns = lags[idx - 1];
    result.lag_ok = result.lag_p99_ns <= 1000000ull;
  }
  // Eventual successes over the window: the give-up rule above converts a
  // saturated backlog into timeouts, so this caps at the served rate without
  // window-edge undercounting at small rates. Clamped so Poisson schedule
  // realization noise cannot over-report the offered rate.
  result.achieved_qps =
      result.window_ns > 0
          ? static_cast<double>(result.ok) * 1e9 / static_cast<double>(result.window_ns)
          : 0.0;
  if (result.achieved_qps > result.offered_qps * 1.001) {
    result.achieved_qps = result.offered_qps * 1.001;
  }
  return result;
}

namespace {
uint64_t median_u64(std::vector<uint64_t> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}
double median_d(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}
uint64_t nearest_rank(std::vector<uint64_t> v, double q) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  size_t idx = static_cast<size_t>(std::ceil(q * static_cast<double>(v.size())));
  if (idx == 0) idx = 1;
  return v[idx - 1];
}
uint64_t pct_or_zero(const LatencyHistogram& h, double q) {
  auto r = h.percentile(q);
  return r.ok() ? *r : 0;
}
}  // namespace

SweepPoint run_to_point(const RunResult& r) {
  SweepPoint p;
  p.offered_qps = r.offered_qps;
  p.achieved_qps = r.achieved_qps;
  p.p50_ns = pct_or_zero(r.all, 0.50);
  p.p90_ns = pct_or_zero(r.all, 0.90);
  p.p99_ns = pct_or_zero(r.all, 0.99);
  p.p99_lo_ns = p.p99_ns;
  p.p99_hi_ns = p.p99_ns;
  p.errors = r.errors;
  p.timeouts = r.timeouts;
  p.shed = r.shed;
  p.runs.push_back(r);
  return p;
}

Result<SweepCurve> sweep(const SweepOptions& opts) {
  if (opts.rates.empty()) return Error{Errc::invalid_argument, "no rates"};
  for (size_t i = 1; i < opts.rates.size(); i++) {
    if (opts.rates[i] <= opts.rates[i - 1]) {
      return Error{Errc::invalid_argument, "rates must be strictly increasing"};
    }
  }
  int repeats = std::max(1, opts.repeats);

  SweepCurve curve;
  curve.points.resize(opts.rates.size());
  for (int rep = 0; rep < repeats; rep++) {
    for (size_t i = 0; i < opts.rates.size(); i++) {
      LoadOptions lo = opts.base;
      lo.rate_qps = opts.rates[i];
      lo.duration_ns = opts.duration_per_point_ns;
      lo.seed = mix64(opts.base.seed ^ (i * 1315423911ull) ^ (static_cast<uint64_t>(rep) << 32));
      auto run = run_load(lo);
      if (!run) {
        return Error{run.error().code,
                     "rate " + std::to_string(opts.rates[i]) + ": " + run.error().to_string()};
      }
      curve.points[i].runs.push_back(std::move(*run));
      if (opts.cooldown_ns > 0) sleep_ns(opts.cooldown_ns);
    }
  }

  for (size_t i = 0; i < curve.points.size(); i++) {
    SweepPoint& p = curve.points[i];
    p.offered_qps = opts.rates[i];
    std::vector<double> achieved;
    std::vector<uint64_t> p50s, p90s, p99s, errs, tos, sheds;
    for (const auto& r : p.runs) {
      achieved.push_back(r.achieved_qps);
      p50s.push_back(pct_or_zero(r.all, 0.50));
      p90s.push_back(pct_or_zero(r.all, 0.90));
      p99s.push_back(pct_or_zero(r.all, 0.99));
      errs.push_back(r.errors);
      tos.push_back(r.timeouts);
      sheds.push_back(r.shed);
    }
    p.achieved_qps = median_d(achieved);
    p.p50_ns = median_u64(p50s);
    p.p90_ns = median_u64(p90s);
    p.p99_ns = median_u64(p99s);
    p.p99_lo_ns = nearest_rank(p99s, 0.10);
    p.p99_hi_ns = nearest_rank(p99s, 0.90);
    p.errors = median_u64(errs);
    p.timeouts = median_u64(tos);
    p.shed = median_u64(sheds);
  }
  return curve;
}

Result<std::optional<double>> find_knee(const SweepCurve& curve, KneeConfig cfg) {
  if (curve.points.size() < 2) return Error{Errc::curve_too_short, "need >= 2 points"};
  uint64_t baseline_p99 = curve.points[0].p99_ns;
  for (const auto& p : curve.points) {
    bool throughput_sat = p.achieved_qps < cfg.throughput_factor * p.offered_qps;
    bool latency_sat =
        baseline_p99 > 0 && static_cast<double>(p.p99_ns) >
                                cfg.p99_factor * static_cast<double>(baseline_p99);
    if (throughput_sat || latency_sat) return std::optional<double>(p.offered_qps);
  }
  return std::optional<double>{};
}

std::string curve_to_csv(const SweepCurve& curve) {
  std::string out =
      "offered_qps,achieved_qps,p50_us,p90_us,p99_us,p99_whisker_lo_us,p99_whisker_hi_us,errors,"
      "timeouts,shed\n";
  char buf[320];
  for (const auto& p : curve.points) {
    snprintf(buf, sizeof(buf), "%.3f,%.3f,%.1f,%.1f,%.1f,%.1f,%.1f,%llu,%llu,%llu\n",
             p.offered_qps, p.achieved_qps, static_cast<double>(p.p50_ns) / 1000.0,
             static_cast<double>(p.p90_ns) / 1000.0, static_cast<double>(p.p99_ns) / 1000.0,
             static_cast<double>(p.p99_lo_ns) / 1000.0, static_cast<double>(p.p99_hi_ns) / 1000.0,
             static_cast<unsigned long long>(p.errors), static_cast<unsigned long long>(p.timeouts),
             static_cast<unsigned long long>(p.shed));
    out += buf;
  }
  return out;
}

Status write_curve_csv(const std::string& path, const SweepCurve& curve) {
  FILE* f = fopen(path.c_str(), "wb");
  if (f == nullptr) return Error{Errc::io_error, "cannot open '" + path + "'"};
  std::string csv = curve_to_csv(curve);
  fwrite(csv.data(), 1, csv.size(), f);
  if (fclose(f) != 0) return Error{Errc::io_error, "close '" + path + "'"};
  return ok_status();
}

}  // namespace moviebench
