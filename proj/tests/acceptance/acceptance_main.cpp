// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0
//
// Acceptance suite: drives full process-mode deployments and checks every
// gate the repo commits to, one pass/fail line per criterion. Long-running;
// budgets assume a small single-machine CI box with loopback networking.

#include <stdlib.h>
#include <unistd.h>

#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "../common/cp_oracle.hpp"
#include "moviebench/analysis.hpp"
#include "moviebench/dataset.hpp"
#include "moviebench/deploy.hpp"
#include "moviebench/loadgen.hpp"
#include "moviebench/rpc_client.hpp"

namespace mb = moviebench;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Harness plumbing

struct Failure {
  std::string message;
};

using CriterionFn = std::function<mb::Result<std::string>()>;

std::string g_bin;
std::string g_work;
std::string g_run_work;  // run dirs (span logs, store copies) on tmpfs when available
mb::DatasetManifest g_dataset;       // 50 MiB videos, used by every live experiment
int g_port_base = 24000;

void note(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  printf("    ");
  vprintf(fmt, args);
  printf("\n");
  va_end(args);
  fflush(stdout);
}

mb::Error fail_msg(const std::string& msg) { return mb::Error{mb::Errc::internal, msg}; }

uint16_t next_ports(int count = 70) {
  int base = g_port_base;
  g_port_base += count;
  return static_cast<uint16_t>(base);
}

std::string fresh_dir(const std::string& tag) {
  static int counter = 0;
  std::string dir = g_run_work + "/" + tag + "-" + std::to_string(counter++);
  fs::remove_all(dir);
  return dir;
}

mb::ServiceTopology shipped_topology(uint16_t port_base) {
  std::ifstream in(std::string(MOVIEBENCH_DATA_DIR) + "/movie.topology");
  std::stringstream ss;
  ss << in.rdbuf();
  auto topo = mb::parse_topology(ss.str());
  if (!topo.ok()) {
    fprintf(stderr, "cannot parse shipped topology: %s\n", topo.error().to_string().c_str());
    exit(2);
  }
  uint16_t next = port_base;
  for (auto& s : topo->services) s.port = next++;
  return *topo;
}

struct Launched {
  std::unique_ptr<mb::Deployment> dep;
  mb::ServiceTopology topo;
};

mb::Result<Launched> launch(const std::string& tag, bool monolith, bool tracing,
                            uint64_t cache_bytes = 4ull << 20) {
  Launched l;
  uint16_t base = next_ports();
  l.topo = shipped_topology(base);
  mb::DeployOptions opts;
  opts.mode = mb::DeployMode::process;
  opts.monolith = monolith;
  opts.serve_exe = g_bin;
  opts.dataset_dir = g_dataset.dir;
  opts.run_dir = fresh_dir(tag);
  opts.collector_port = static_cast<uint16_t>(base + 60);
  opts.tracing = tracing;
  opts.chunk_bytes = 1ull << 20;  // 1 MiB chunks
  opts.cache_bytes = cache_bytes;
  auto dep = mb::Deployment::launch(l.topo, opts);
  if (!dep.ok()) return dep.error();
  l.dep = std::move(*dep);
  return l;
}

mb::LoadOptions base_load(const Launched& l, double rate, double duration_s,
                          mb::RequestMix mix) {
  mb::LoadOptions opts;
  opts.entry = l.dep->entry_addr();
  opts.mix = mix;
  opts.rate_qps = rate;
  opts.duration_ns = static_cast<uint64_t>(duration_s * 1e9);
  opts.seed = 20260808;
  opts.arrival = mb::Arrival::uniform;
  opts.workers = 40;
  opts.timeout_ns = 750000000ull;
  opts.warmup_ns = 2000000000ull;
  opts.movies = g_dataset.movies;
  opts.users = g_dataset.users;
  opts.rent_price = 1;
  return opts;
}

const mb::RequestMix kBrowseOnly{1.0, 0.0, 0.0};
const mb::RequestMix kRentOnly{0.0, 0.0, 1.0};
const mb::RequestMix kDefaultMix{0.8, 0.15, 0.05};
// Breakdown comparisons use the interactive mix: every rent streams dozens of
// frontend-only chunk traces that would drown the per-service attribution.
const mb::RequestMix kPageMix{0.85, 0.15, 0.0};

// Criterion 11 rides along every traced experiment: spans persisted + dropped
// must equal spans recorded, per service, including the load client.
uint64_t g_conservation_checks = 0;
uint64_t g_conservation_failures = 0;

void check_conservation(Launched& l) {
  mb::sleep_ns(500000000ull);  // let the last flush cycle land
  auto stats = l.dep->service_stats();
  auto totals = l.dep->collector_totals();
  if (!stats.ok() || !totals.ok()) {
    g_conservation_failures++;
    note("conservation: stats unavailable");
    return;
  }
  for (const auto& [svc, st] : *stats) {
    g_conservation_checks++;
    uint64_t persisted = 0;
    auto it = totals->per_service.find(svc);
    if (it != totals->per_service.end()) persisted = it->second;
    if (persisted + st.dropped != st.recorded) {
      g_conservation_failures++;
      note("conservation VIOLATION %s: persisted %" PRIu64 " + dropped %" PRIu64
           " != recorded %" PRIu64,
           svc.c_str(), persisted, st.dropped, st.recorded);
    }
  }
}

// One load run against a deployment, with optional client span shipping.
mb::Result<mb::RunResult> run_once(Launched& l, const mb::LoadOptions& base, bool trace_client) {
  mb::LoadOptions opts = base;
  std::unique_ptr<mb::Recorder> recorder;
  if (trace_client) {
    mb::Recorder::Options ropts;
    ropts.service = "client";
    ropts.collector = l.dep->collector_addr();
    recorder = std::make_unique<mb::Recorder>(ropts);
    opts.recorder = recorder.get();
  }
  auto run = mb::run_load(opts);
  if (recorder) {
    recorder->final_flush(mb::mono_now_ns() + 4000000000ull);
    recorder->stop();
  }
  return run;
}

uint64_t p99_of(const mb::RunResult& r) {
  auto p = r.all.percentile(0.99);
  return p.ok() ? *p : 0;
}

// Geometric probe for the saturation region: returns the first rate where
// either knee criterion trips.
mb::Result<double> probe_knee(Launched& l, mb::RequestMix mix, double start_rate,
                              double growth, double max_rate, double duration_s) {
  for (double rate = start_rate; rate <= max_rate; rate *= growth) {
    auto run = run_once(l, base_load(l, rate, duration_s, mix), false);
    if (!run.ok()) return run.error();
    uint64_t p99 = p99_of(*run);
    note("probe rate %.0f: achieved %.1f p99 %.2f ms ok=%" PRIu64 " err=%" PRIu64
         " to=%" PRIu64 " shed=%" PRIu64,
         rate, run->achieved_qps, static_cast<double>(p99) / 1e6, run->ok, run->errors,
         run->timeouts, run->shed);
    if (run->achieved_qps < 0.95 * rate) return rate;
  }
  return fail_msg("no saturation up to " + std::to_string(max_rate) + " qps");
}

std::vector<double> grid_around(double knee_est, const std::vector<double>& fractions) {
  std::vector<double> rates;
  for (double f : fractions) {
    double r = std::max(1.0, std::round(knee_est * f));
    if (rates.empty() || r > rates.back()) rates.push_back(r);
  }
  return rates;
}

// Cache fill before a sweep, so the first (baseline) point measures the
// steady state rather than cold-start store reads.
mb::Result<std::monostate> warm_deployment(Launched& l, mb::RequestMix mix, double rate,
                                           double seconds) {
  auto run = run_once(l, base_load(l, rate, seconds, mix), false);
  if (!run.ok()) return run.error();
  return std::monostate{};
}

mb::Result<mb::SweepCurve> sweep_on(Launched& l, mb::RequestMix mix,
                                    const std::vector<double>& rates, double duration_s) {
  mb::SweepOptions opts;
  opts.base = base_load(l, 0, duration_s, mix);
  opts.rates = rates;
  opts.duration_per_point_ns = static_cast<uint64_t>(duration_s * 1e9);
  opts.cooldown_ns = 1000000000ull;
  opts.repeats = 1;
  return mb::sweep(opts);
}

// Median curve across repeated sweeps, point-wise.
mb::SweepCurve median_curve(const std::vector<mb::SweepCurve>& curves) {
  mb::SweepCurve out;
  size_t points = curves[0].points.size();
  for (size_t i = 0; i < points; i++) {
    std::vector<double> achieved;
    std::vector<uint64_t> p99s, p50s;
    for (const auto& c : curves) {
      achieved.push_back(c.points[i].achieved_qps);
      p99s.push_back(c.points[i].p99_ns);
      p50s.push_back(c.points[i].p50_ns);
    }
    std::sort(achieved.begin(), achieved.end());
    std::sort(p99s.begin(), p99s.end());
    std::sort(p50s.begin(), p50s.end());
    mb::SweepPoint p;
    p.offered_qps = curves[0].points[i].offered_qps;
    p.achieved_qps = achieved[(achieved.size() - 1) / 2];
    p.p99_ns = p99s[(p99s.size() - 1) / 2];
    p.p50_ns = p50s[(p50s.size() - 1) / 2];
    p.p99_lo_ns = p99s.front();
    p.p99_hi_ns = p99s.back();
    out.points.push_back(p);
  }
  return out;
}

void log_curve(const mb::SweepCurve& curve, const char* tag) {
  for (const auto& p : curve.points) {
    note("%s offered %.0f achieved %.1f p50 %.2fms p99 %.2fms err %" PRIu64 " to %" PRIu64
         " shed %" PRIu64,
         tag, p.offered_qps, p.achieved_qps, static_cast<double>(p.p50_ns) / 1e6,
         static_cast<double>(p.p99_ns) / 1e6, p.errors, p.timeouts, p.shed);
  }
}

// Cached cross-criterion measurements.
double g_browse_knee = 0;           // median browse knee (criterion 1)
std::vector<double> g_browse_knees;  // per repetition (criterion 2 pairing)

// When a criterion runs standalone, seed the knee from a quick probe instead
// of requiring criterion 1 in the same invocation.
mb::Result<double> ensure_browse_knee() {
  if (g_browse_knee > 0) return g_browse_knee;
  // Standalone fallback: same procedure as criterion 1, one repetition.
  auto l = launch("knee-probe", false, true);
  if (!l.ok()) return l.error();
  auto warmed = warm_deployment(*l, kBrowseOnly, 25, 12.0);
  if (!warmed.ok()) return warmed.error();
  auto est = probe_knee(*l, kBrowseOnly, 24, 1.5, 4000, 5.0);
  if (!est.ok()) return est.error();
  auto curve = sweep_on(*l, kBrowseOnly, grid_around(*est, {0.1, 0.3, 0.55, 0.8, 1.0, 1.25, 1.5}),
                        6.0);
  l->dep->shutdown();
  if (!curve.ok()) return curve.error();
  auto knee = mb::find_knee(*curve);
  if (!knee.ok()) return knee.error();
  if (!knee->has_value()) return fail_msg("no knee in the standalone sweep");
  g_browse_knee = **knee;
  note("standalone browse knee: %.0f qps", g_browse_knee);
  return g_browse_knee;
}

// ---------------------------------------------------------------------------
// Criterion 1: queueing saturation shape on a browse-only sweep.

mb::Result<std::string> criterion1() {
  auto l = launch("c1", false, true);
  if (!l.ok()) return l.error();

  auto warmed = warm_deployment(*l, kBrowseOnly, 25, 12.0);
  if (!warmed.ok()) return warmed.error();
  auto knee_est = probe_knee(*l, kBrowseOnly, 24, 1.5, 4000, 5.0);
  if (!knee_est.ok()) return knee_est.error();
  note("browse knee estimate: %.0f qps", *knee_est);

  std::vector<double> rates =
      grid_around(*knee_est, {0.1, 0.3, 0.55, 0.8, 1.0, 1.25, 1.5});
  std::vector<mb::SweepCurve> curves;
  for (int rep = 0; rep < 3; rep++) {
    auto curve = sweep_on(*l, kBrowseOnly, rates, 6.0);
    if (!curve.ok()) return curve.error();
    curves.push_back(std::move(*curve));
    auto knee = mb::find_knee(curves.back());
    if (knee.ok() && knee->has_value()) g_browse_knees.push_back(**knee);
    else g_browse_knees.push_back(0);  // no knee in this repetition
  }
  mb::SweepCurve median = median_curve(curves);
  log_curve(median, "c1-median");

  auto knee = mb::find_knee(median);
  if (!knee.ok()) return knee.error();
  if (!knee->has_value()) return fail_msg("median browse sweep has no knee");
  double knee_rate = **knee;
  g_browse_knee = knee_rate;

  size_t knee_idx = 0, low_idx = 0;
  for (size_t i = 0; i < median.points.size(); i++) {
    if (median.points[i].offered_qps == knee_rate) knee_idx = i;
  }
  // The 10%-of-knee point is the first grid point by construction.
  double low_target = 0.1 * knee_rate;
  double best_gap = 1e18;
  for (size_t i = 0; i < median.points.size(); i++) {
    double gap = std::abs(median.points[i].offered_qps - low_target);
    if (gap < best_gap) {
      best_gap = gap;
      low_idx = i;
    }
  }
  double p99_ratio = static_cast<double>(median.points[knee_idx].p99_ns) /
                     static_cast<double>(median.points[low_idx].p99_ns);
  bool tracks = true;
  for (size_t i = 0; i < knee_idx; i++) {
    if (median.points[i].achieved_qps < 0.95 * median.points[i].offered_qps) tracks = false;
  }
  check_conservation(*l);
  l->dep->shutdown();

  char buf[256];
  snprintf(buf, sizeof(buf),
           "knee at %.0f qps, p99(knee)/p99(10%%) = %.1fx (need >= 5), below-knee tracking %s",
           knee_rate, p99_ratio, tracks ? "ok" : "VIOLATED");
  if (p99_ratio < 5.0) return fail_msg(std::string(buf) + " - tail ratio too small");
  if (!tracks) return fail_msg(std::string(buf));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 2: rent saturates earlier than browse, every repetition.

mb::Result<std::string> criterion2() {
  auto bk = ensure_browse_knee();
  if (!bk.ok()) return bk.error();
  auto l = launch("c2", false, true);
  if (!l.ok()) return l.error();

  auto warmed = warm_deployment(*l, kPageMix, 25, 10.0);
  if (!warmed.ok()) return warmed.error();
  auto rent_est = probe_knee(*l, kRentOnly, 1, 1.8, 400, 5.0);
  if (!rent_est.ok()) return rent_est.error();
  note("rent knee estimate: %.0f qps", *rent_est);
  std::vector<double> rates = grid_around(*rent_est, {0.2, 0.5, 0.75, 1.0, 1.35, 1.7});

  std::string detail;
  for (int rep = 0; rep < 3; rep++) {
    auto curve = sweep_on(*l, kRentOnly, rates, 6.0);
    if (!curve.ok()) return curve.error();
    log_curve(*curve, "c2-rent");
    auto knee = mb::find_knee(*curve);
    if (!knee.ok()) return knee.error();
    if (!knee->has_value()) return fail_msg("rent sweep found no knee");
    double browse_knee = rep < static_cast<int>(g_browse_knees.size()) && g_browse_knees[rep] > 0
                             ? g_browse_knees[rep]
                             : g_browse_knee;
    if (browse_knee <= 0) return fail_msg("criterion 1 must run first");
    detail += "rep" + std::to_string(rep + 1) + ": rent " + std::to_string(**knee) + " vs browse " +
              std::to_string(browse_knee) + "; ";
    if (**knee >= browse_knee) {
      check_conservation(*l);
      l->dep->shutdown();
      return fail_msg("rent knee did not come first: " + detail);
    }
  }
  check_conservation(*l);
  l->dep->shutdown();
  return "rent saturates below browse in 3/3 repetitions (" + detail + ")";
}

// ---------------------------------------------------------------------------
// Criterion 3: tracing overhead at half the knee.

mb::Result<std::string> criterion3() {
  auto bk = ensure_browse_knee();
  if (!bk.ok()) return bk.error();
  double rate = std::max(1.0, 0.5 * g_browse_knee);

  // Legs inside a pair run back to back so slow host-level noise (shared-box
  // CPU weather lasting tens of seconds) hits both legs and cancels in the
  // ratio; the order alternates across pairs; the median over pairs is the
  // reported figure.
  constexpr int kPairs = 5;
  std::vector<double> p99_deg, tput_deg;
  for (int pair = 0; pair < kPairs; pair++) {
    std::optional<mb::RunResult> run_off, run_on;
    for (int leg = 0; leg < 2; leg++) {
      bool tracing_on = (pair % 2 == 0) ? (leg == 1) : (leg == 0);
      auto l = launch(tracing_on ? "c3-on" : "c3-off", false, tracing_on);
      if (!l.ok()) return l.error();
      auto warm = run_once(*l, base_load(*l, rate, 4.0, kBrowseOnly), false);
      if (!warm.ok()) return warm.error();
      auto run = run_once(*l, base_load(*l, rate, 12.0, kBrowseOnly), tracing_on);
      if (!run.ok()) return run.error();
      if (tracing_on) {
        check_conservation(*l);
        run_on = std::move(*run);
      } else {
        run_off = std::move(*run);
      }
      l->dep->shutdown();
    }

    double d_p99 = static_cast<double>(p99_of(*run_on)) / static_cast<double>(p99_of(*run_off)) -
                   1.0;
    double d_tput = run_off->achieved_qps > 0
                        ? 1.0 - run_on->achieved_qps / run_off->achieved_qps
                        : 0.0;
    p99_deg.push_back(d_p99);
    tput_deg.push_back(d_tput);
    note("pair %d: p99 off %.2fms on %.2fms (%+.1f%%), tput off %.1f on %.1f (%+.1f%%)", pair + 1,
         static_cast<double>(p99_of(*run_off)) / 1e6,
         static_cast<double>(p99_of(*run_on)) / 1e6, 100 * d_p99, run_off->achieved_qps,
         run_on->achieved_qps, 100 * d_tput);
  }
  std::sort(p99_deg.begin(), p99_deg.end());
  std::sort(tput_deg.begin(), tput_deg.end());
  double med_p99 = p99_deg[kPairs / 2];
  double med_tput = tput_deg[kPairs / 2];
  char buf[192];
  snprintf(buf, sizeof(buf),
           "median p99 degradation %.1f%% over %d pairs (budget 5%%), throughput degradation "
           "%.1f%% (budget 2%%); reference figures are 0.1%%/0.2%%",
           100 * med_p99, kPairs, 100 * med_tput);
  if (med_p99 > 0.05) return fail_msg(buf);
  if (med_tput > 0.02) return fail_msg(buf);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 4: bottleneck shift between 10% and 90% of the mixed-load knee.

mb::Result<mb::Breakdown> breakdown_of_run(Launched& l, double rate, double duration_s,
                                           const std::string& label, double warm_rate) {
  // Reach cache steady state before measuring; the paper's low-load point is
  // a quiet system, not a cold one.
  auto warm = run_once(l, base_load(l, warm_rate, 15.0, kPageMix), false);
  if (!warm.ok()) return warm.error();
  auto run = run_once(*&l, base_load(l, rate, duration_s, kPageMix), true);
  if (!run.ok()) return run.error();
  check_conservation(l);
  mb::sleep_ns(300000000ull);
  auto loaded = mb::load_span_log(l.dep->span_log_path());
  if (!loaded.ok()) return loaded.error();
  auto assembled = mb::assemble(loaded->spans);
  return mb::per_service_breakdown(assembled.trees, label);
}

mb::Result<std::string> criterion4() {
  // The load axis anchors on the sweep knee (first rate where throughput or
  // tail saturates), measured the same way criterion 1 measures it.
  auto probe = launch("c4-probe", false, true);
  if (!probe.ok()) return probe.error();
  auto warmed = warm_deployment(*probe, kPageMix, 25, 12.0);
  if (!warmed.ok()) return warmed.error();
  auto est = probe_knee(*probe, kPageMix, 24, 1.5, 4000, 5.0);
  if (!est.ok()) {
    probe->dep->shutdown();
    return est.error();
  }
  auto curve = sweep_on(*probe, kPageMix,
                        grid_around(*est, {0.1, 0.3, 0.55, 0.8, 1.0, 1.25, 1.5}), 6.0);
  probe->dep->shutdown();
  if (!curve.ok()) return curve.error();
  log_curve(*curve, "c4-sweep");
  auto found = mb::find_knee(*curve);
  if (!found.ok()) return found.error();
  if (!found->has_value()) return fail_msg("mixed sweep has no knee");
  mb::Result<double> knee_est(**found);
  note("mixed sweep knee: %.0f qps", *knee_est);

  int passes = 0;
  std::string detail;
  for (int rep = 0; rep < 3; rep++) {
    auto low_dep = launch("c4-low", false, true);
    if (!low_dep.ok()) return low_dep.error();
    auto low = breakdown_of_run(*low_dep, std::max(1.0, 0.1 * *knee_est), 10.0, "low",
                                0.4 * *knee_est);
    low_dep->dep->shutdown();
    if (!low.ok()) return low.error();

    auto high_dep = launch("c4-high", false, true);
    if (!high_dep.ok()) return high_dep.error();
    auto high = breakdown_of_run(*high_dep, 0.9 * *knee_est, 10.0, "high", 0.4 * *knee_est);
    high_dep->dep->shutdown();
    if (!high.ok()) return high.error();

    // (a) the frontend holds the largest single share at low load
    std::string biggest;
    double biggest_f = -1;
    for (const auto& [svc, f] : low->fraction) {
      if (svc == "client") continue;
      if (f > biggest_f) {
        biggest_f = f;
        biggest = svc;
      }
    }
    // (b) the store tier's share strictly increases low -> high
    auto tier_share = [&](const mb::Breakdown& b) {
      double share = 0;
      for (const auto& [svc, f] : b.fraction) {
        if (svc == "store") share += f;
      }
      return share;
    };
    double store_low = tier_share(*low);
    double store_high = tier_share(*high);
    std::string low_str, high_str;
    for (const auto& [svc, f] : low->fraction) {
      char b[64];
      snprintf(b, sizeof(b), "%s=%.2f ", svc.c_str(), f);
      low_str += b;
    }
    for (const auto& [svc, f] : high->fraction) {
      char b[64];
      snprintf(b, sizeof(b), "%s=%.2f ", svc.c_str(), f);
      high_str += b;
    }
    note("low:  %s", low_str.c_str());
    note("high: %s", high_str.c_str());
    bool ok_a = biggest == "frontend";
    bool ok_b = store_high > store_low;
    if (ok_a && ok_b) passes++;
    char buf[192];
    snprintf(buf, sizeof(buf), "rep%d: top-low=%s (%.2f), store %.3f->%.3f %s%s; ", rep + 1,
             biggest.c_str(), biggest_f, store_low, store_high, ok_a ? "" : "FRONTEND-NOT-TOP ",
             ok_b ? "" : "STORE-NOT-RISING");
    detail += buf;
    note("%s", buf);
  }
  if (passes < 2) return fail_msg("bottleneck shift held in " + std::to_string(passes) +
                                  "/3 repetitions: " + detail);
  return "held in " + std::to_string(passes) + "/3 repetitions (" + detail + ")";
}

// ---------------------------------------------------------------------------
// Criterion 5: aggregate network fraction, microservices vs monolith.

mb::Result<double> network_fraction_of_run(Launched& l, double rate, double duration_s) {
  auto run = run_once(l, base_load(l, rate, duration_s, kBrowseOnly), false);
  if (!run.ok()) return run.error();
  check_conservation(l);
  mb::sleep_ns(300000000ull);
  auto loaded = mb::load_span_log(l.dep->span_log_path());
  if (!loaded.ok()) return loaded.error();
  auto assembled = mb::assemble(loaded->spans);
  return mb::aggregate_network_fraction(assembled.trees);
}

double g_mono_knee = 0;

mb::Result<double> mono_knee() {
  if (g_mono_knee > 0) return g_mono_knee;
  auto probe = launch("mono-probe", true, true);
  if (!probe.ok()) return probe.error();
  auto warmed = warm_deployment(*probe, kBrowseOnly, 25, 12.0);
  if (!warmed.ok()) return warmed.error();
  auto knee = probe_knee(*probe, kBrowseOnly, 24, 1.5, 6000, 5.0);
  probe->dep->shutdown();
  if (!knee.ok()) return knee.error();
  note("monolith browse knee estimate: %.0f qps", *knee);
  g_mono_knee = *knee;
  return g_mono_knee;
}

mb::Result<std::string> criterion5() {
  auto bk = ensure_browse_knee();
  if (!bk.ok()) return bk.error();
  auto mk = mono_knee();
  if (!mk.ok()) return mk.error();
  double matched = std::min(g_browse_knee, *mk);
  double low = std::max(1.0, 0.1 * matched);
  double high = 0.9 * matched;

  double micro_frac[2], mono_frac[2];
  {
    auto l = launch("c5-micro", false, true);
    if (!l.ok()) return l.error();
    auto f_low = network_fraction_of_run(*l, low, 8.0);
    if (!f_low.ok()) return f_low.error();
    l->dep->shutdown();
    auto l2 = launch("c5-micro-high", false, true);
    if (!l2.ok()) return l2.error();
    auto f_high = network_fraction_of_run(*l2, high, 8.0);
    if (!f_high.ok()) return f_high.error();
    l2->dep->shutdown();
    micro_frac[0] = *f_low;
    micro_frac[1] = *f_high;
  }
  {
    auto l = launch("c5-mono", true, true);
    if (!l.ok()) return l.error();
    auto f_low = network_fraction_of_run(*l, low, 8.0);
    if (!f_low.ok()) return f_low.error();
    l->dep->shutdown();
    auto l2 = launch("c5-mono-high", true, true);
    if (!l2.ok()) return l2.error();
    auto f_high = network_fraction_of_run(*l2, high, 8.0);
    if (!f_high.ok()) return f_high.error();
    l2->dep->shutdown();
    mono_frac[0] = *f_low;
    mono_frac[1] = *f_high;
  }
  char buf[224];
  snprintf(buf, sizeof(buf),
           "network fraction low: micro %.3f vs mono %.3f; high: micro %.3f vs mono %.3f "
           "(matched %.0f/%.0f qps)",
           micro_frac[0], mono_frac[0], micro_frac[1], mono_frac[1], low, high);
  if (micro_frac[0] <= mono_frac[0] || micro_frac[1] <= mono_frac[1]) return fail_msg(buf);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 6: slowdown compounding, microservices vs monolith.

mb::Result<std::string> criterion6() {
  auto bk = ensure_browse_knee();
  if (!bk.ok()) return bk.error();
  auto mk = mono_knee();
  if (!mk.ok()) return mk.error();

  auto ratio_for = [&](bool monolith, double knee) -> mb::Result<double> {
    auto l = launch(monolith ? "c6-mono" : "c6-micro", monolith, true);
    if (!l.ok()) return l.error();
    double rate = std::max(1.0, 0.5 * knee);
    auto base = run_once(*l, base_load(*l, rate, 8.0, kBrowseOnly), false);
    if (!base.ok()) return base.error();
    std::map<std::string, double> slow;
    for (const auto& s : l->topo.services) slow[s.name] = 0.5;
    auto st = l->dep->apply_slowdown(slow);
    if (!st.ok()) return st.error();
    auto slowed = run_once(*l, base_load(*l, rate, 8.0, kBrowseOnly), false);
    if (!slowed.ok()) return slowed.error();
    check_conservation(*l);
    l->dep->shutdown();
    double ratio = static_cast<double>(p99_of(*slowed)) / static_cast<double>(p99_of(*base));
    note("%s at %.0f qps: p99 %.2fms -> %.2fms (x%.2f)", monolith ? "monolith" : "microservices",
         rate, static_cast<double>(p99_of(*base)) / 1e6,
         static_cast<double>(p99_of(*slowed)) / 1e6, ratio);
    return ratio;
  };

  std::vector<double> micro_ratios, mono_ratios;
  for (int rep = 0; rep < 3; rep++) {
    auto rm = ratio_for(false, g_browse_knee);
    if (!rm.ok()) return rm.error();
    micro_ratios.push_back(*rm);
    auto ro = ratio_for(true, *mk);
    if (!ro.ok()) return ro.error();
    mono_ratios.push_back(*ro);
  }
  std::sort(micro_ratios.begin(), micro_ratios.end());
  std::sort(mono_ratios.begin(), mono_ratios.end());
  double micro_med = micro_ratios[1];
  double mono_med = mono_ratios[1];
  char buf[160];
  snprintf(buf, sizeof(buf),
           "median p99 inflation under global 0.5 slowdown: microservices x%.2f vs monolith x%.2f",
           micro_med, mono_med);
  if (micro_med <= mono_med) return fail_msg(buf);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Criterion 7: critical-path oracle equivalence, 1000 random trees.

mb::Result<std::string> criterion7() {
  cp_oracle::TreeGen gen(424242);
  for (int trial = 0; trial < 1000; trial++) {
    auto assembled = gen.build(static_cast<uint64_t>(trial) + 1);
    if (assembled.trees.size() != 1) return fail_msg("generator produced a malformed trace");
    const auto& tree = assembled.trees[0];
    auto segs = mb::critical_path(tree);
    if (!segs.ok()) return fail_msg("trial " + std::to_string(trial) + ": " +
                                    segs.error().to_string());
    if (cp_oracle::total_ns(*segs) != tree.root->server->duration_ns()) {
      return fail_msg("trial " + std::to_string(trial) + ": segment sum != root duration");
    }
    auto got = cp_oracle::sum_segments(*segs);
    auto expect = cp_oracle::oracle_totals(tree);
    if (got != expect) {
      return fail_msg("trial " + std::to_string(trial) + ": totals differ from brute force");
    }
  }
  return std::string("1000/1000 random trees match the brute-force oracle exactly, sums conserved");
}

// ---------------------------------------------------------------------------
// Criterion 8: percentile accuracy against exact sort.

mb::Result<std::string> criterion8() {
  mb::Rng rng(0xacce55);
  auto run_dist = [&](const char* name, std::function<uint64_t()> gen) -> mb::Result<std::string> {
    mb::LatencyHistogram h;
    std::vector<uint64_t> raw;
    raw.reserve(100000);
    for (int i = 0; i < 100000; i++) {
      uint64_t v = gen();
      h.record(v);
      raw.push_back(v);
    }
    std::sort(raw.begin(), raw.end());
    for (double q : {0.5, 0.9, 0.99}) {
      size_t rank = static_cast<size_t>(std::ceil(q * static_cast<double>(raw.size())));
      uint64_t exact = raw[rank - 1];
      auto approx = h.percentile(q);
      if (!approx.ok()) return approx.error();
      double err = std::abs(static_cast<double>(*approx) - static_cast<double>(exact)) /
                   static_cast<double>(exact);
      if (err > 0.01) {
        return fail_msg(std::string(name) + " q=" + std::to_string(q) + " error " +
                        std::to_string(err));
      }
    }
    return std::string(name);
  };
  auto uniform = run_dist("uniform", [&] { return 10000 + rng.next_u64() % 80000000; });
  if (!uniform.ok()) return uniform.error();
  auto lognormal = run_dist("log-normal", [&] {
    return static_cast<uint64_t>(std::max(2000.0, rng.lognormal(3000000.0, 1.0)));
  });
  if (!lognormal.ok()) return lognormal.error();
  auto bimodal = run_dist("bimodal", [&] {
    return rng.next_u64() % 2 == 0 ? 40000 + rng.next_u64() % 4000
                                   : 60000000 + rng.next_u64() % 600000;
  });
  if (!bimodal.ok()) return bimodal.error();
  return std::string("p50/p90/p99 within 1% of exact sort for uniform, log-normal, bimodal");
}

// ---------------------------------------------------------------------------
// Criterion 9: wire protocol gates.

mb::Result<std::string> criterion9() {
  // Golden frame, byte for byte.
  mb::RpcMessage ping;
  ping.kind = mb::MsgKind::request;
  ping.method = "Ping";
  ping.context.trace_id = {0, 1};
  ping.context.span_id = 1;
  auto frame = mb::encode_frame(ping);
  if (!frame.ok()) return frame.error();
  std::ifstream golden(std::string(MOVIEBENCH_DATA_DIR) + "/golden/ping_request.frame",
                       std::ios::binary);
  std::stringstream ss;
  ss << golden.rdbuf();
  if (*frame != ss.str()) return fail_msg("golden ping frame mismatch");

  // 10^4 random round trips.
  mb::Rng rng(0x90de5);
  for (int i = 0; i < 10000; i++) {
    mb::RpcMessage m;
    m.kind = static_cast<mb::MsgKind>(rng.next_u64() % 3);
    m.context.trace_id = {rng.next_u64(), rng.next_u64() | 1};
    m.context.span_id = rng.next_u64() | 1;
    m.context.parent_span_id = rng.next_u64() % 2 == 0 ? 0 : rng.next_u64();
    size_t mlen = m.kind == mb::MsgKind::request ? 1 + rng.next_u64() % 24 : rng.next_u64() % 8;
    for (size_t k = 0; k < mlen; k++) m.method.push_back(static_cast<char>('A' + rng.next_u64() % 26));
    bool seen[256] = {false};
    for (size_t f = rng.next_u64() % 5; f > 0; f--) {
      uint8_t tag = static_cast<uint8_t>(rng.next_u64() % 256);
      if (seen[tag]) continue;
      seen[tag] = true;
      std::string value(rng.next_u64() % 256, static_cast<char>(rng.next_u64() & 0xff));
      m.add(tag, value);
    }
    auto f = mb::encode_frame(m);
    if (!f.ok()) return f.error();
    auto back = mb::decode_frame(*f);
    if (!back.ok()) return fail_msg("round-trip decode failed: " + back.error().to_string());
    if (!(*back == m)) return fail_msg("round-trip mismatch at iteration " + std::to_string(i));
  }

  // 10^5 mutation fuzz cases: typed error or valid message, never a crash.
  std::vector<std::string> bases;
  for (int i = 0; i < 40; i++) {
    mb::RpcMessage m = ping;
    m.add(0, std::string(rng.next_u64() % 64, 'x'));
    m.context.span_id = rng.next_u64() | 1;
    bases.push_back(*mb::encode_frame(m));
  }
  for (int i = 0; i < 100000; i++) {
    std::string mutated = bases[rng.next_u64() % bases.size()];
    for (int k = 0; k < 3; k++) {
      switch (rng.next_u64() % 3) {
        case 0:
          if (!mutated.empty()) {
            mutated[rng.next_u64() % mutated.size()] = static_cast<char>(rng.next_u64() & 0xff);
          }
          break;
        case 1:
          mutated.push_back(static_cast<char>(rng.next_u64() & 0xff));
          break;
        case 2:
          if (!mutated.empty()) mutated.resize(rng.next_u64() % mutated.size());
          break;
      }
    }
    auto r = mb::decode_frame(mutated);
    (void)r;  // either outcome is legal; surviving is the requirement
  }
  return std::string("golden frame exact, 10^4 round-trips exact, 10^5 fuzz cases without a crash");
}

// ---------------------------------------------------------------------------
// Criterion 10: dataset determinism and monolith/microservices equivalence.

mb::Result<std::string> criterion10() {
  // generate_dataset(1000, s) twice: identical checksums. Small videos keep
  // the disk footprint sane; the spec's corpus size of 1000 is what matters.
  mb::DatasetOptions opts;
  opts.movies = 1000;
  opts.seed = 91;
  opts.video_bytes = 256 << 10;
  opts.dir = g_work + "/c10-a";
  auto a = mb::generate_dataset(opts);
  if (!a.ok()) return a.error();
  opts.dir = g_work + "/c10-b";
  auto b = mb::generate_dataset(opts);
  if (!b.ok()) return b.error();
  bool checksum_ok = a->checksum == b->checksum;
  char sums[96];
  snprintf(sums, sizeof(sums), "checksum %016" PRIx64 " reproduced=%s", a->checksum,
           checksum_ok ? "yes" : "NO");
  fs::remove_all(a->dir);
  fs::remove_all(b->dir);
  if (!checksum_ok) return fail_msg(sums);

  // 500 randomized requests, byte-identical bodies across deployments.
  auto micro = launch("c10-micro", false, true);
  if (!micro.ok()) return micro.error();
  auto mono = launch("c10-mono", true, true);
  if (!mono.ok()) return mono.error();

  mb::IdSource ids;
  mb::Channel micro_ch(micro->dep->entry_addr(), "client", nullptr);
  mb::Channel mono_ch(mono->dep->entry_addr(), "client", nullptr);
  mb::CallOptions copts;
  copts.timeout_ns = 20000000000ull;

  mb::Rng rng(55);
  int mismatches = 0;
  for (int i = 0; i < 500; i++) {
    uint64_t movie = 1 + rng.next_u64() % g_dataset.movies;
    uint64_t user = 1 + rng.next_u64() % g_dataset.users;
    mb::RpcMessage req_a, req_b;
    switch (rng.next_u64() % 3) {
      case 0:
        req_a = mb::make_browse_request(mb::root_context(ids), movie);
        req_b = mb::make_browse_request(mb::root_context(ids), movie);
        break;
      case 1: {
        uint8_t stars = static_cast<uint8_t>(1 + rng.next_u64() % 5);
        std::string text = "rq" + std::to_string(i);
        req_a = mb::make_review_request(mb::root_context(ids), movie, user, stars, text);
        req_b = mb::make_review_request(mb::root_context(ids), movie, user, stars, text);
        break;
      }
      case 2:
        req_a = mb::make_rent_request(mb::root_context(ids), user, movie, 1);
        req_b = mb::make_rent_request(mb::root_context(ids), user, movie, 1);
        break;
    }
    auto ra = micro_ch.call(req_a, copts);
    auto rb = mono_ch.call(req_b, copts);
    if (!ra.ok() || !rb.ok()) return fail_msg("transport failure during differential run");
    if (ra->kind != rb->kind || !(ra->fields == rb->fields)) mismatches++;
  }
  micro->dep->shutdown();
  mono->dep->shutdown();
  if (mismatches > 0) {
    return fail_msg(std::string(sums) + "; " + std::to_string(mismatches) +
                    "/500 differential mismatches");
  }
  return std::string(sums) + "; 500/500 byte-identical bodies across deployments";
}

// ---------------------------------------------------------------------------
// Criterion 11: span conservation, plus trace count == successful requests on
// a clean run.

mb::Result<std::string> criterion11() {
  auto l = launch("c11", false, true);
  if (!l.ok()) return l.error();
  auto run = run_once(*l, base_load(*l, 20, 6.0, kBrowseOnly), true);
  if (!run.ok()) return run.error();
  check_conservation(*l);

  auto stats = l->dep->service_stats();
  if (!stats.ok()) return stats.error();
  uint64_t dropped = 0;
  for (const auto& [svc, st] : *stats) dropped += st.dropped;

  mb::sleep_ns(300000000ull);
  auto loaded = mb::load_span_log(l->dep->span_log_path());
  if (!loaded.ok()) return loaded.error();
  auto assembled = mb::assemble(loaded->spans);
  uint64_t app_traces = 0;
  for (const auto& tree : assembled.trees) {
    if (tree.root->server != nullptr && tree.root->server->operation != "Health") app_traces++;
  }
  l->dep->shutdown();

  char buf[224];
  snprintf(buf, sizeof(buf),
           "dropped=%" PRIu64 ", app traces %" PRIu64 " vs successful rpcs %" PRIu64
           "; conservation checks %" PRIu64 " with %" PRIu64 " violations",
           dropped, app_traces, run->rpc_ok, g_conservation_checks, g_conservation_failures);
  if (run->errors + run->timeouts + run->shed > 0) {
    return fail_msg(std::string(buf) + " (run was not clean)");
  }
  if (dropped != 0) return fail_msg(std::string(buf) + " (spans dropped on a light run)");
  if (app_traces != run->rpc_ok) return fail_msg(buf);
  if (g_conservation_failures > 0) return fail_msg(buf);
  return std::string(buf);
}

}  // namespace

int main(int argc, char** argv) {
  const char* bin = getenv("MOVIEBENCH_BIN");
  if (bin == nullptr) {
    fprintf(stderr, "MOVIEBENCH_BIN must point at the moviebench executable\n");
    return 2;
  }
  g_bin = bin;
  g_work = (fs::temp_directory_path() / ("moviebench-acceptance-" + std::to_string(getpid())))
               .string();
  fs::create_directories(g_work);
  // Span logs and store copies live on tmpfs when present: steady disk
  // writeback on a one-core box injects multi-ms scheduler stalls straight
  // into the measured tail.
  g_run_work = fs::exists("/dev/shm") ? "/dev/shm/moviebench-acc-" + std::to_string(getpid())
                                      : g_work;
  fs::create_directories(g_run_work);

  int only = 0;
  if (argc > 1) only = atoi(argv[1]);

  printf("generating the experiment dataset (50 MiB videos)...\n");
  fflush(stdout);
  {
    mb::DatasetOptions opts;
    opts.dir = g_work + "/dataset";
    opts.movies = 60;
    opts.users = 2000;
    opts.seed = 20260808;
    opts.video_bytes = 50ull << 20;
    auto man = mb::generate_dataset(opts);
    if (!man.ok()) {
      fprintf(stderr, "dataset generation failed: %s\n", man.error().to_string().c_str());
      return 2;
    }
    g_dataset = *man;
  }

  struct Entry {
    int id;
    const char* name;
    CriterionFn fn;
  };
  std::vector<Entry> criteria = {
      {1, "queueing saturation shape (browse sweep knee)", criterion1},
      {2, "query-type diversity (rent saturates first)", criterion2},
      {3, "tracing overhead at half knee", criterion3},
      {4, "bottleneck shift low vs high load", criterion4},
      {5, "network fraction: microservices above monolith", criterion5},
      {6, "slowdown compounding: microservices above monolith", criterion6},
      {7, "critical-path oracle equivalence", criterion7},
      {8, "percentile accuracy", criterion8},
      {9, "wire protocol golden/round-trip/fuzz", criterion9},
      {10, "dataset determinism and deployment equivalence", criterion10},
      {11, "span conservation and trace counts", criterion11},
  };

  int failures = 0;
  for (auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    printf("=== criterion %d: %s\n", c.id, c.name);
    fflush(stdout);
    uint64_t t0 = mb::mono_now_ns();
    auto result = c.fn();
    double secs = static_cast<double>(mb::mono_now_ns() - t0) / 1e9;
    if (result.ok()) {
      printf("[PASS] criterion %d (%s): %s (%.0f s)\n", c.id, c.name, result->c_str(), secs);
    } else {
      printf("[FAIL] criterion %d (%s): %s (%.0f s)\n", c.id, c.name,
             result.error().to_string().c_str(), secs);
      failures++;
    }
    fflush(stdout);
  }
  printf("%s: %d criterion failure(s)\n", failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
         failures);
  fs::remove_all(g_work);
  if (g_run_work != g_work) fs::remove_all(g_run_work);
  return failures == 0 ? 0 : 1;
}
