// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include <signal.h>

#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "moviebench/analysis.hpp"
#include "moviebench/collector.hpp"
#include "moviebench/dataset.hpp"
#include "moviebench/deploy.hpp"
#include "moviebench/loadgen.hpp"
#include "moviebench/rpc_client.hpp"
#include "moviebench/service_host.hpp"

namespace mb = moviebench;

namespace {

std::atomic<bool> g_signalled{false};
void on_signal(int) { g_signalled.store(true); }

void install_signals() {
  struct sigaction sa{};
  sa.sa_handler = on_signal;
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

int fail(const mb::Error& err) {
  fprintf(stderr, "error: %s\n", err.to_string().c_str());
  return 1;
}

mb::Result<mb::ServiceTopology> read_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) return mb::Error{mb::Errc::io_error, "cannot read '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<mb::ParseIssue> issues;
  auto topo = mb::parse_topology(ss.str(), &issues);
  if (!topo) {
    for (const auto& issue : issues) {
      fprintf(stderr, "%s:%d: %s (%s)\n", path.c_str(), issue.line, issue.message.c_str(),
              mb::errc_name(issue.code));
    }
    return topo.error();
  }
  return topo;
}

uint64_t seconds_ns(double s) { return static_cast<uint64_t>(s * 1e9); }

struct CommonServeFlags {
  std::string topology;
  std::string dataset;
  std::string run_dir;
  std::string collector;
  std::string tracing = "on";
  uint64_t chunk_bytes = 1ull << 20;
  uint64_t cache_bytes = 16ull << 20;

  void attach(CLI::App* cmd) {
    cmd->add_option("--topology", topology)->required();
    cmd->add_option("--dataset", dataset)->required();
    cmd->add_option("--run-dir", run_dir)->required();
    cmd->add_option("--collector", collector);
    cmd->add_option("--tracing", tracing)->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--chunk-bytes", chunk_bytes);
    cmd->add_option("--cache-bytes", cache_bytes);
  }

  mb::HostOptions host_options() const {
    mb::HostOptions h;
    h.dataset_dir = dataset;
    h.run_dir = run_dir;
    h.collector = collector;
    h.tracing = tracing == "on" && !collector.empty();
    h.chunk_bytes = chunk_bytes;
    h.cache_bytes = cache_bytes;
    return h;
  }
};

int wait_for_server(mb::RpcServer* server) {
  while (!g_signalled.load() && !server->is_stopped()) {
    mb::sleep_ns(50000000ull);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  install_signals();
  CLI::App app{"moviebench: a desk-scale movie streaming microservices benchmark"};
  app.require_subcommand(1);

  // --- dataset ---------------------------------------------------------------
  auto* cmd_dataset = app.add_subcommand("dataset", "generate the synthetic dataset");
  std::string ds_out;
  uint64_t ds_movies = 1000, ds_users = 0, ds_seed = 1, ds_video = 50ull << 20;
  cmd_dataset->add_option("--out", ds_out)->required();
  cmd_dataset->add_option("--movies", ds_movies);
  cmd_dataset->add_option("--users", ds_users);
  cmd_dataset->add_option("--seed", ds_seed);
  cmd_dataset->add_option("--video-bytes", ds_video);
  cmd_dataset->callback([&] {
    mb::DatasetOptions opts;
    opts.dir = ds_out;
    opts.movies = ds_movies;
    opts.users = ds_users;
    opts.seed = ds_seed;
    opts.video_bytes = ds_video;
    auto man = mb::generate_dataset(opts);
    if (!man) exit(fail(man.error()));
    printf("dataset %s movies=%" PRIu64 " users=%" PRIu64 " reviews=%" PRIu64 " blobs=%" PRIu64
           " checksum=%016" PRIx64 "\n",
           man->dir.c_str(), man->movies, man->users, man->reviews, man->blobs, man->checksum);
  });

  // --- validate ----------------------------------------------------------------
  auto* cmd_validate = app.add_subcommand("validate", "parse and validate a topology file");
  std::string val_topology;
  cmd_validate->add_option("--topology", val_topology)->required();
  cmd_validate->callback([&] {
    auto topo = read_topology(val_topology);
    if (!topo) exit(1);
    auto violations = mb::validate(*topo);
    for (const auto& v : violations) {
      printf("%s: %s (%s)\n", v.element.c_str(), v.message.c_str(), mb::errc_name(v.kind));
    }
    if (!violations.empty()) exit(1);
    printf("ok: %zu services, %zu edges, entry %s\n", topo->services.size(), topo->edges.size(),
           topo->entry.c_str());
  });

  // --- collector ----------------------------------------------------------------
  auto* cmd_collector = app.add_subcommand("collector", "run the span collector");
  uint16_t col_port = 0;
  std::string col_log;
  cmd_collector->add_option("--port", col_port)->required();
  cmd_collector->add_option("--log", col_log)->required();
  cmd_collector->callback([&] {
    mb::CollectorServer::Options opts;
    opts.port = col_port;
    opts.log_path = col_log;
    auto collector = mb::CollectorServer::start(opts);
    if (!collector) exit(fail(collector.error()));
    wait_for_server((*collector)->server());
    (*collector)->stop();
  });

  // --- serve ----------------------------------------------------------------
  auto* cmd_serve = app.add_subcommand("serve", "run one microservice");
  CommonServeFlags serve_flags;
  std::string serve_service;
  serve_flags.attach(cmd_serve);
  cmd_serve->add_option("--service", serve_service)->required();
  cmd_serve->callback([&] {
    auto topo = read_topology(serve_flags.topology);
    if (!topo) exit(1);
    auto host = mb::ServiceHost::start(*topo, serve_service, serve_flags.host_options());
    if (!host) exit(fail(host.error()));
    wait_for_server((*host)->server());
    (*host)->stop();
  });

  // --- monolith ----------------------------------------------------------------
  auto* cmd_monolith = app.add_subcommand("monolith", "run the whole app in one process");
  CommonServeFlags mono_flags;
  mono_flags.attach(cmd_monolith);
  cmd_monolith->callback([&] {
    auto topo = read_topology(mono_flags.topology);
    if (!topo) exit(1);
    auto host = mb::MonolithHost::start(*topo, mono_flags.host_options());
    if (!host) exit(fail(host.error()));
    wait_for_server((*host)->server());
    (*host)->stop();
  });

  // --- up ----------------------------------------------------------------------
  auto* cmd_up = app.add_subcommand("up", "launch the full deployment and wait");
  std::string up_topology, up_dataset, up_run_dir, up_mode = "process";
  uint16_t up_collector_port = 9100;
  bool up_monolith = false;
  std::string up_tracing = "on";
  uint64_t up_chunk = 1ull << 20, up_cache = 16ull << 20;
  cmd_up->add_option("--topology", up_topology)->required();
  cmd_up->add_option("--dataset", up_dataset)->required();
  cmd_up->add_option("--run-dir", up_run_dir)->required();
  cmd_up->add_option("--collector-port", up_collector_port);
  cmd_up->add_option("--mode", up_mode)->check(CLI::IsMember({"process", "thread"}));
  cmd_up->add_flag("--monolith", up_monolith);
  cmd_up->add_option("--tracing", up_tracing)->check(CLI::IsMember({"on", "off"}));
  cmd_up->add_option("--chunk-bytes", up_chunk);
  cmd_up->add_option("--cache-bytes", up_cache);
  cmd_up->callback([&] {
    auto topo = read_topology(up_topology);
    if (!topo) exit(1);
    mb::DeployOptions opts;
    opts.mode = up_mode == "process" ? mb::DeployMode::process : mb::DeployMode::thread;
    opts.monolith = up_monolith;
    opts.dataset_dir = up_dataset;
    opts.run_dir = up_run_dir;
    opts.collector_port = up_collector_port;
    opts.tracing = up_tracing == "on";
    opts.chunk_bytes = up_chunk;
    opts.cache_bytes = up_cache;
    auto dep = mb::Deployment::launch(*topo, opts);
    if (!dep) exit(fail(dep.error()));
    printf("ready entry=%s collector=%s span_log=%s\n", (*dep)->entry_addr().c_str(),
           opts.tracing ? (*dep)->collector_addr().c_str() : "-",
           opts.tracing ? (*dep)->span_log_path().c_str() : "-");
    fflush(stdout);
    while (!g_signalled.load()) mb::sleep_ns(100000000ull);
    auto summary = (*dep)->shutdown();
    for (const auto& per : summary.services) {
      printf("shutdown %s recorded=%" PRIu64 " dropped=%" PRIu64 "%s\n", per.name.c_str(),
             per.stats.recorded, per.stats.dropped, per.forced_kill ? " FORCED" : "");
    }
  });

  // --- loadgen -------------------------------------------------------------------
  auto* cmd_loadgen = app.add_subcommand("loadgen", "open-loop load generator");
  std::string lg_entry, lg_mix = "browse=0.8,review=0.15,rent=0.05", lg_arrival = "poisson";
  std::string lg_out, lg_dataset;
  double lg_rate = 100;
  double lg_duration = 10, lg_warmup = 5;
  uint64_t lg_seed = 1, lg_timeout_ms = 1000, lg_movies = 0, lg_users = 0, lg_price = 1;
  int lg_workers = 64;
  cmd_loadgen->add_option("--entry", lg_entry)->required();
  cmd_loadgen->add_option("--mix", lg_mix);
  cmd_loadgen->add_option("--rate", lg_rate)->required();
  cmd_loadgen->add_option("--duration", lg_duration);
  cmd_loadgen->add_option("--seed", lg_seed);
  cmd_loadgen->add_option("--arrival", lg_arrival)->check(CLI::IsMember({"poisson", "uniform"}));
  cmd_loadgen->add_option("--out", lg_out);
  cmd_loadgen->add_option("--dataset", lg_dataset);
  cmd_loadgen->add_option("--movies", lg_movies);
  cmd_loadgen->add_option("--users", lg_users);
  cmd_loadgen->add_option("--timeout-ms", lg_timeout_ms);
  cmd_loadgen->add_option("--workers", lg_workers);
  cmd_loadgen->add_option("--warmup", lg_warmup);
  cmd_loadgen->add_option("--rent-price", lg_price);
  cmd_loadgen->callback([&] {
    auto mix = mb::RequestMix::parse(lg_mix);
    if (!mix) exit(fail(mix.error()));
    mb::LoadOptions opts;
    opts.entry = lg_entry;
    opts.mix = *mix;
    opts.rate_qps = lg_rate;
    opts.duration_ns = seconds_ns(lg_duration);
    opts.seed = lg_seed;
    opts.arrival = lg_arrival == "uniform" ? mb::Arrival::uniform : mb::Arrival::poisson;
    opts.workers = lg_workers;
    opts.timeout_ns = lg_timeout_ms * 1000000ull;
    opts.warmup_ns = seconds_ns(lg_warmup);
    opts.rent_price = lg_price;
    if (!lg_dataset.empty()) {
      auto man = mb::load_manifest(lg_dataset);
      if (!man) exit(fail(man.error()));
      opts.movies = man->movies;
      opts.users = man->users;
    }
    if (lg_movies > 0) opts.movies = lg_movies;
    if (lg_users > 0) opts.users = lg_users;
    auto run = mb::run_load(opts);
    if (!run) exit(fail(run.error()));
    mb::SweepCurve curve;
    curve.points.push_back(mb::run_to_point(*run));
    std::string csv = mb::curve_to_csv(curve);
    if (!lg_out.empty()) {
      auto st = mb::write_text_file(lg_out, csv);
      if (!st) exit(fail(st.error()));
    }
    printf("%s", csv.c_str());
    if (!run->lag_ok) {
      printf("# warning: scheduler lag p99 %.3f ms exceeds 1 ms, run flagged invalid\n",
             static_cast<double>(run->lag_p99_ns) / 1e6);
    }
  });

  // --- sweep ----------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "rate sweep producing a throughput-latency curve");
  std::string sw_entry, sw_mix = "browse=0.8,review=0.15,rent=0.05", sw_arrival = "poisson";
  std::string sw_out, sw_rates_text, sw_dataset;
  double sw_duration = 10, sw_warmup = 3, sw_cooldown = 2;
  uint64_t sw_seed = 1, sw_timeout_ms = 1000, sw_movies = 0, sw_users = 0, sw_price = 1;
  int sw_workers = 64, sw_repeats = 1;
  cmd_sweep->add_option("--entry", sw_entry)->required();
  cmd_sweep->add_option("--mix", sw_mix);
  cmd_sweep->add_option("--rates", sw_rates_text)->required();
  cmd_sweep->add_option("--duration-per-point", sw_duration);
  cmd_sweep->add_option("--repeats", sw_repeats);
  cmd_sweep->add_option("--cooldown", sw_cooldown);
  cmd_sweep->add_option("--seed", sw_seed);
  cmd_sweep->add_option("--arrival", sw_arrival)->check(CLI::IsMember({"poisson", "uniform"}));
  cmd_sweep->add_option("--out", sw_out);
  cmd_sweep->add_option("--dataset", sw_dataset);
  cmd_sweep->add_option("--movies", sw_movies);
  cmd_sweep->add_option("--users", sw_users);
  cmd_sweep->add_option("--timeout-ms", sw_timeout_ms);
  cmd_sweep->add_option("--workers", sw_workers);
  cmd_sweep->add_option("--warmup", sw_warmup);
  cmd_sweep->add_option("--rent-price", sw_price);
  cmd_sweep->callback([&] {
    auto mix = mb::RequestMix::parse(sw_mix);
    if (!mix) exit(fail(mix.error()));
    mb::SweepOptions opts;
    opts.base.entry = sw_entry;
    opts.base.mix = *mix;
    opts.base.seed = sw_seed;
    opts.base.arrival = sw_arrival == "uniform" ? mb::Arrival::uniform : mb::Arrival::poisson;
    opts.base.workers = sw_workers;
    opts.base.timeout_ns = sw_timeout_ms * 1000000ull;
    opts.base.warmup_ns = seconds_ns(sw_warmup);
    opts.base.rent_price = sw_price;
    if (!sw_dataset.empty()) {
      auto man = mb::load_manifest(sw_dataset);
      if (!man) exit(fail(man.error()));
      opts.base.movies = man->movies;
      opts.base.users = man->users;
    }
    if (sw_movies > 0) opts.base.movies = sw_movies;
    if (sw_users > 0) opts.base.users = sw_users;
    opts.duration_per_point_ns = seconds_ns(sw_duration);
    opts.cooldown_ns = seconds_ns(sw_cooldown);
    opts.repeats = sw_repeats;
    std::stringstream ss(sw_rates_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) opts.rates.push_back(strtod(item.c_str(), nullptr));
    }
    auto curve = mb::sweep(opts);
    if (!curve) exit(fail(curve.error()));
    std::string csv = mb::curve_to_csv(*curve);
    if (!sw_out.empty()) {
      auto st = mb::write_text_file(sw_out, csv);
      if (!st) exit(fail(st.error()));
    }
    printf("%s", csv.c_str());
    auto knee = mb::find_knee(*curve);
    if (knee.ok()) {
      if (knee->has_value()) {
        printf("# knee at offered %.1f qps (thresholds: achieved < 0.95*offered or p99 > 10x "
               "baseline)\n",
               **knee);
      } else {
        printf("# no knee found\n");
      }
    }
  });

  // --- analyze ----------------------------------------------------------------
  auto* cmd_analyze = app.add_subcommand("analyze", "offline trace analysis");
  cmd_analyze->require_subcommand(1);

  auto* an_breakdown = cmd_analyze->add_subcommand("breakdown", "per-service latency attribution");
  std::string ab_spans, ab_label = "run", ab_out, ab_mode = "critical";
  an_breakdown->add_option("--spans", ab_spans)->required();
  an_breakdown->add_option("--label", ab_label);
  an_breakdown->add_option("--out", ab_out);
  an_breakdown->add_option("--mode", ab_mode)->check(CLI::IsMember({"critical", "total"}));
  an_breakdown->callback([&] {
    auto load = mb::load_span_log(ab_spans);
    if (!load) exit(fail(load.error()));
    auto assembled = mb::assemble(load->spans);
    auto b = mb::per_service_breakdown(assembled.trees, ab_label,
                                       ab_mode == "critical" ? mb::BreakdownMode::critical_path
                                                             : mb::BreakdownMode::total_time);
    if (!b) exit(fail(b.error()));
    std::string csv = mb::breakdown_to_csv(*b);
    if (!ab_out.empty()) {
      auto st = mb::write_text_file(ab_out, csv);
      if (!st) exit(fail(st.error()));
    }
    printf("%s", csv.c_str());
  });

  auto* an_split = cmd_analyze->add_subcommand("split", "network vs compute vs wait per service");
  std::string as_spans, as_out;
  an_split->add_option("--spans", as_spans)->required();
  an_split->add_option("--out", as_out);
  an_split->callback([&] {
    auto load = mb::load_span_log(as_spans);
    if (!load) exit(fail(load.error()));
    auto assembled = mb::assemble(load->spans);
    auto splits = mb::comm_compute_split(assembled.trees);
    if (!splits) exit(fail(splits.error()));
    std::string csv = mb::split_to_csv(*splits);
    if (!as_out.empty()) {
      auto st = mb::write_text_file(as_out, csv);
      if (!st) exit(fail(st.error()));
    }
    printf("%s", csv.c_str());
  });

  auto* an_shift = cmd_analyze->add_subcommand("shift", "bottleneck shift between two breakdowns");
  std::string sh_low, sh_high, sh_out;
  an_shift->add_option("--low", sh_low)->required();
  an_shift->add_option("--high", sh_high)->required();
  an_shift->add_option("--out", sh_out);
  an_shift->callback([&] {
    auto low = mb::breakdown_from_csv(sh_low);
    if (!low) exit(fail(low.error()));
    auto high = mb::breakdown_from_csv(sh_high);
    if (!high) exit(fail(high.error()));
    auto report = mb::compare_loads(*low, *high);
    if (!report) exit(fail(report.error()));
    std::string csv = mb::shift_to_csv(*report);
    if (!sh_out.empty()) {
      auto st = mb::write_text_file(sh_out, csv);
      if (!st) exit(fail(st.error()));
    }
    printf("%s", csv.c_str());
  });

  // --- slowdown ----------------------------------------------------------------
  auto* cmd_slowdown = app.add_subcommand("slowdown", "live-update per-service slowdown factors");
  std::string sd_topology, sd_profile;
  double sd_all = 0;
  bool sd_monolith = false;
  cmd_slowdown->add_option("--topology", sd_topology)->required();
  cmd_slowdown->add_option("--profile", sd_profile);
  cmd_slowdown->add_option("--all", sd_all);
  cmd_slowdown->add_flag("--monolith", sd_monolith);
  cmd_slowdown->callback([&] {
    auto topo = read_topology(sd_topology);
    if (!topo) exit(1);
    std::map<std::string, double> profile;
    if (sd_all > 0) {
      for (const auto& s : topo->services) profile[s.name] = sd_all;
    }
    std::stringstream ss(sd_profile);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) continue;
      profile[item.substr(0, eq)] = strtod(item.c_str() + eq + 1, nullptr);
    }
    if (profile.empty()) exit(fail(mb::Error{mb::Errc::invalid_argument, "empty profile"}));
    // A deployment handle is not available from a separate process; talk to
    // the admin surface directly, mirroring Deployment::apply_slowdown.
    for (const auto& [name, factor] : profile) {
      const mb::ServiceSpec* spec = topo->find(name);
      if (spec == nullptr) exit(fail(mb::Error{mb::Errc::unknown_service, name}));
      if (factor <= 0) {
        exit(fail(mb::Error{mb::Errc::invalid_argument, name + ": slowdown must be > 0"}));
      }
    }
    for (const auto& [name, factor] : profile) {
      uint16_t port = sd_monolith ? topo->find(topo->entry)->port : topo->find(name)->port;
      mb::IdSource ids;
      mb::Channel ch("127.0.0.1:" + std::to_string(port), "cli", nullptr);
      mb::RpcMessage req;
      req.kind = mb::MsgKind::request;
      req.method = "Slowdown";
      req.context = mb::root_context(ids);
      req.add(0, name);
      req.add(1, std::to_string(factor));
      auto r = ch.call(req);
      if (!r) exit(fail(r.error()));
      if (r->kind == mb::MsgKind::error) exit(fail(r->as_error()));
    }
    printf("applied %zu slowdown factors\n", profile.size());
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}
