// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <set>

namespace moviebench {

const char* path_category_name(PathCategory c) {
  switch (c) {
    case PathCategory::compute:
      return "compute";
    case PathCategory::network:
      return "network";
    case PathCategory::wait:
      return "wait";
  }
  return "compute";
}

namespace {

// Gap attributed to a span's own service, split compute/wait in proportion to
// its app:wait accounting (integer floor on the compute part keeps the pair
// summing to the gap exactly).
void push_own_gap(std::vector<PathSegment>& segs, const Span& s, uint64_t gap) {
  if (gap == 0) return;
  uint64_t app = s.app_ns;
  uint64_t wait = s.wait_ns();
  if (app + wait == 0) {
    segs.push_back({s.service, PathCategory::network, gap});
    return;
  }
  uint64_t compute_part = static_cast<uint64_t>(
      (static_cast<unsigned __int128>(gap) * app) / (app + wait));
  uint64_t wait_part = gap - compute_part;
  if (compute_part > 0) segs.push_back({s.service, PathCategory::compute, compute_part});
  if (wait_part > 0) segs.push_back({s.service, PathCategory::wait, wait_part});
}

struct Sweeper {
  Error error{Errc::ok, ""};
  bool failed = false;

  void fail(std::string msg) {
    if (!failed) {
      failed = true;
      error = Error{Errc::malformed_tree, std::move(msg)};
    }
  }

  // Children of `node` selected by the backward sweep over [w_start, w_end]
  // on node's server clock, latest-end-first.
  std::vector<TraceNode*> select_chain(const TraceNode& node, uint64_t w_start, uint64_t w_end) {
    std::vector<TraceNode*> kids = node.children;
    for (TraceNode* k : kids) {
      if (k->client == nullptr) {
        fail("child without client span");
        return {};
      }
      if (k->client->t_end < k->client->t_start) {
        fail("client span with negative interval");
        return {};
      }
      if (k->client->t_start < w_start || k->client->t_end > w_end) {
        fail("child interval outside parent span");
        return {};
      }
    }
    std::sort(kids.begin(), kids.end(), [](const TraceNode* a, const TraceNode* b) {
      if (a->client->t_end != b->client->t_end) return a->client->t_end > b->client->t_end;
      return a->span_id > b->span_id;
    });
    std::vector<TraceNode*> chain;
    uint64_t cursor = w_end;
    size_t i = 0;
    while (i < kids.size()) {
      while (i < kids.size() && kids[i]->client->t_end > cursor) i++;
      if (i >= kids.size()) break;
      chain.push_back(kids[i]);
      cursor = kids[i]->client->t_start;
      i++;
    }
    return chain;
  }

  // A selected child call contributes exactly its client-interval duration.
  void child_contribution(const TraceNode& node, std::vector<PathSegment>& segs) {
    const Span* cl = node.client;
    const Span* m = node.server;
    if (m == nullptr) {
      fail("child without server span");
      return;
    }
    uint64_t call_dur = cl->t_end - cl->t_start;
    uint64_t m_dur = m->t_end - m->t_start;
    if (m->net_ns + m->app_ns > m_dur) {
      fail("server span with net+app exceeding duration");
      return;
    }
    uint64_t app_eff = std::min(m->app_ns, call_dur);
    uint64_t hop = call_dur - app_eff;
    // Cross-process network+queue: labelled with the server's own wait
    // accounting, remainder network (clock-skew immune).
    uint64_t wait_part = std::min(m->wait_ns(), hop);
    uint64_t net_part = hop - wait_part;
    if (net_part > 0) segs.push_back({m->service, PathCategory::network, net_part});
    if (wait_part > 0) segs.push_back({m->service, PathCategory::wait, wait_part});
    interior(node, app_eff, segs);
  }

  // Handler-interior critical path of the server span, totalling `budget`.
  void interior(const TraceNode& node, uint64_t budget, std::vector<PathSegment>& segs) {
    const Span* m = node.server;
    auto chain = select_chain(node, m->t_start, m->t_end);
    if (failed) return;
    uint64_t selected = 0;
    for (TraceNode* k : chain) selected += k->client->t_end - k->client->t_start;
    uint64_t own = budget >= selected ? budget - selected : 0;
    if (own > 0) segs.push_back({m->service, PathCategory::compute, own});
    for (TraceNode* k : chain) {
      child_contribution(*k, segs);
      if (failed) return;
    }
  }
};

}  // namespace

Result<std::vector<PathSegment>> critical_path(const SpanTree& tree) {
  if (tree.root == nullptr || tree.root->server == nullptr) {
    return Error{Errc::malformed_tree, "root is not a server span"};
  }
  const Span& root = *tree.root->server;
  if (root.t_end < root.t_start) return Error{Errc::malformed_tree, "negative root interval"};
  if (root.net_ns + root.app_ns > root.t_end - root.t_start) {
    return Error{Errc::malformed_tree, "root net+app exceeds duration"};
  }

  Sweeper sw;
  std::vector<PathSegment> segs;
  auto chain = sw.select_chain(*tree.root, root.t_start, root.t_end);
  if (sw.failed) return sw.error;

  uint64_t cursor = root.t_end;
  for (TraceNode* k : chain) {
    push_own_gap(segs, root, cursor - k->client->t_end);
    sw.child_contribution(*k, segs);
    if (sw.failed) return sw.error;
    cursor = k->client->t_start;
  }
  push_own_gap(segs, root, cursor - root.t_start);
  return segs;
}

Result<Breakdown> per_service_breakdown(const std::vector<SpanTree>& trees,
                                        const std::string& load_label, BreakdownMode mode) {
  if (trees.empty()) return Error{Errc::empty_input, "no traces"};
  Breakdown b;
  b.load_label = load_label;
  uint64_t grand = 0;
  for (const auto& tree : trees) {
    if (!tree.complete()) {
      b.excluded_traces++;
      continue;
    }
    if (mode == BreakdownMode::critical_path) {
      auto segs = critical_path(tree);
      if (!segs.ok()) {
        b.excluded_traces++;
        continue;
      }
      for (const auto& seg : *segs) {
        b.total_ns[seg.service] += seg.duration_ns;
        grand += seg.duration_ns;
      }
    } else {
      for (const auto& node : tree.nodes) {
        uint64_t d = node->server->duration_ns();
        b.total_ns[node->server->service] += d;
        grand += d;
      }
    }
    b.total_traces++;
  }
  if (b.total_traces == 0) return Error{Errc::empty_input, "no complete traces"};
  for (const auto& [svc, ns] : b.total_ns) {
    b.fraction[svc] = grand > 0 ? static_cast<double>(ns) / static_cast<double>(grand) : 0.0;
  }
  return b;
}

Result<std::map<std::string, ServiceSplit>> comm_compute_split(
    const std::vector<SpanTree>& trees) {
  if (trees.empty()) return Error{Errc::empty_input, "no traces"};
  struct Acc {
    uint64_t net = 0, app = 0, wait = 0, dur = 0, spans = 0;
  };
  std::map<std::string, Acc> accs;
  for (const auto& tree : trees) {
    for (const auto& node : tree.nodes) {
      if (node->server == nullptr) continue;
      const Span& s = *node->server;
      Acc& a = accs[s.service];
      a.net += s.net_ns;
      a.app += s.app_ns;
      a.wait += s.wait_ns();
      a.dur += s.duration_ns();
      a.spans++;
    }
  }
  if (accs.empty()) return Error{Errc::empty_input, "no server spans"};
  std::map<std::string, ServiceSplit> out;
  for (const auto& [svc, a] : accs) {
    ServiceSplit sp;
    sp.spans = a.spans;
    sp.total_ns = a.dur;
    if (a.dur > 0) {
      sp.network_fraction = static_cast<double>(a.net) / static_cast<double>(a.dur);
      sp.compute_fraction = static_cast<double>(a.app) / static_cast<double>(a.dur);
      sp.wait_fraction = static_cast<double>(a.wait) / static_cast<double>(a.dur);
    }
    out[svc] = sp;
  }
  return out;
}

Result<double> aggregate_network_fraction(const std::vector<SpanTree>& trees) {
  auto splits = comm_compute_split(trees);
  if (!splits.ok()) return splits.error();
  unsigned __int128 net = 0, dur = 0;
  for (const auto& [svc, sp] : *splits) {
    net += static_cast<uint64_t>(sp.network_fraction * static_cast<double>(sp.total_ns));
    dur += sp.total_ns;
  }
  if (dur == 0) return Error{Errc::empty_input, "zero total duration"};
  return static_cast<double>(net) / static_cast<double>(dur);
}

Result<ShiftReport> compare_loads(const Breakdown& low, const Breakdown& high) {
  std::set<std::string> only_low, only_high;
  for (const auto& [svc, f] : low.fraction) {
    if (high.fraction.find(svc) == high.fraction.end()) only_low.insert(svc);
  }
  for (const auto& [svc, f] : high.fraction) {
    if (low.fraction.find(svc) == low.fraction.end()) only_high.insert(svc);
  }
  if (!only_low.empty() || !only_high.empty()) {
    std::string detail = "only in low: ";
    for (const auto& s : only_low) detail += s + " ";
    detail += "| only in high: ";
    for (const auto& s : only_high) detail += s + " ";
    return Error{Errc::service_set_mismatch, detail};
  }

  ShiftReport report;
  report.low = low;
  report.high = high;

  auto ranks = [](const std::map<std::string, double>& fractions) {
    std::vector<std::pair<std::string, double>> v(fractions.begin(), fractions.end());
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    std::map<std::string, int> out;
    for (size_t i = 0; i < v.size(); i++) out[v[i].first] = static_cast<int>(i) + 1;
    return out;
  };
  auto rank_low = ranks(low.fraction);
  auto rank_high = ranks(high.fraction);

  for (const auto& [svc, f_low] : low.fraction) {
    ShiftRow row;
    row.service = svc;
    row.low_fraction = f_low;
    row.high_fraction = high.fraction.at(svc);
    row.delta = row.high_fraction - row.low_fraction;
    row.rank_low = rank_low[svc];
    row.rank_high = rank_high[svc];
    report.rows.push_back(std::move(row));
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const ShiftRow& a, const ShiftRow& b) {
    if (a.delta != b.delta) return a.delta > b.delta;
    return a.service < b.service;
  });

  for (const auto& a : report.rows) {
    for (const auto& b : report.rows) {
      if (a.service >= b.service) continue;
      bool a_ahead_low = a.low_fraction > b.low_fraction;
      bool b_ahead_high = b.high_fraction > a.high_fraction;
      bool b_ahead_low = b.low_fraction > a.low_fraction;
      bool a_ahead_high = a.high_fraction > b.high_fraction;
      if (a_ahead_low && b_ahead_high) report.inversions.emplace_back(a.service, b.service);
      if (b_ahead_low && a_ahead_high) report.inversions.emplace_back(b.service, a.service);
    }
  }
  std::sort(report.inversions.begin(), report.inversions.end());
  return report;
}

std::string breakdown_to_csv(const Breakdown& b) {
  std::string out;
  char buf[256];
  snprintf(buf, sizeof(buf), "# traces=%llu excluded=%llu\n",
           static_cast<unsigned long long>(b.total_traces),
           static_cast<unsigned long long>(b.excluded_traces));
  out += buf;
  out += "service,fraction,traces,load_label\n";
  for (const auto& [svc, f] : b.fraction) {
    snprintf(buf, sizeof(buf), "%s,%.9f,%llu,%s\n", svc.c_str(), f,
             static_cast<unsigned long long>(b.total_traces), b.load_label.c_str());
    out += buf;
  }
  return out;
}

std::string split_to_csv(const std::map<std::string, ServiceSplit>& splits) {
  std::string out = "service,network_fraction,compute_fraction,wait_fraction,spans\n";
  char buf[256];
  for (const auto& [svc, sp] : splits) {
    snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%.9f,%llu\n", svc.c_str(), sp.network_fraction,
             sp.compute_fraction, sp.wait_fraction, static_cast<unsigned long long>(sp.spans));
    out += buf;
  }
  return out;
}

std::string shift_to_csv(const ShiftReport& r) {
  std::string out = "# inversions:";
  if (r.inversions.empty()) {
    out += " none";
  } else {
    for (const auto& [was, now] : r.inversions) out += " " + was + ">" + now;
  }
  out += "\n";
  out += "service,low_fraction,high_fraction,delta,rank_low,rank_high\n";
  char buf[256];
  for (const auto& row : r.rows) {
    snprintf(buf, sizeof(buf), "%s,%.9f,%.9f,%.9f,%d,%d\n", row.service.c_str(), row.low_fraction,
             row.high_fraction, row.delta, row.rank_low, row.rank_high);
    out += buf;
  }
  return out;
}

Status write_text_file(const std::string& path, const std::string& content) {
  FILE* f = fopen(path.c_str(), "wb");
  if (f == nullptr) return Error{Errc::io_error, "cannot open '" + path + "'"};
  if (fwrite(content.data(), 1, content.size(), f) != content.size()) {
    fclose(f);
    return Error{Errc::io_error, "short write to '" + path + "'"};
  }
  if (fclose(f) != 0) return Error{Errc::io_error, "close '" + path + "'"};
  return ok_status();
}

Result<Breakdown> breakdown_from_csv(const std::string& path) {
  FILE* f = fopen(path.c_str(), "rb");
  if (f == nullptr) return Error{Errc::io_error, "cannot open '" + path + "'"};
  Breakdown b;
  char line[1024];
  bool header_seen = false;
  while (fgets(line, sizeof(line), f) != nullptr) {
    if (line[0] == '#' || line[0] == '\n') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::string s(line);
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    std::vector<std::string> cols;
    size_t pos = 0;
    while (pos <= s.size()) {
      size_t comma = s.find(',', pos);
      if (comma == std::string::npos) comma = s.size();
      cols.push_back(s.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (cols.size() != 4) {
      fclose(f);
      return Error{Errc::malformed_line, s};
    }
    b.fraction[cols[0]] = strtod(cols[1].c_str(), nullptr);
    b.total_traces = strtoull(cols[2].c_str(), nullptr, 10);
    b.load_label = cols[3];
  }
  fclose(f);
  if (b.fraction.empty()) return Error{Errc::empty_input, path};
  return b;
}

}  // namespace moviebench
