// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#include "moviebench/topology.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

namespace moviebench {

const char* role_name(ServiceRole r) {
  switch (r) {
    case ServiceRole::frontend:
      return "frontend";
    case ServiceRole::logic:
      return "logic";
    case ServiceRole::cache:
      return "cache";
    case ServiceRole::store:
      return "store";
    case ServiceRole::blob:
      return "blob";
  }
  return "logic";
}

bool role_from_name(std::string_view s, ServiceRole* out) {
  if (s == "frontend") *out = ServiceRole::frontend;
  else if (s == "logic") *out = ServiceRole::logic;
  else if (s == "cache") *out = ServiceRole::cache;
  else if (s == "store") *out = ServiceRole::store;
  else if (s == "blob") *out = ServiceRole::blob;
  else return false;
  return true;
}

const ServiceSpec* ServiceTopology::find(std::string_view name) const {
  for (const auto& s : services) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

std::vector<const Edge*> ServiceTopology::out_edges(std::string_view caller) const {
  std::vector<const Edge*> out;
  for (const auto& e : edges) {
    if (e.caller == caller) out.push_back(&e);
  }
  return out;
}

namespace {

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> toks;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) i++;
    if (i >= line.size() || line[i] == '#') break;
    size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') i++;
    toks.emplace_back(line.substr(start, i - start));
  }
  return toks;
}

bool parse_long(const std::string& s, long* out) {
  char* end = nullptr;
  long v = strtol(s.c_str(), &end, 10);
  if (end == nullptr || *end != '\0' || s.empty()) return false;
  *out = v;
  return true;
}

bool parse_double(const std::string& s, double* out) {
  char* end = nullptr;
  double v = strtod(s.c_str(), &end);
  if (end == nullptr || *end != '\0' || s.empty()) return false;
  *out = v;
  return true;
}

}  // namespace

Result<ServiceTopology> parse_topology(std::string_view text, std::vector<ParseIssue>* issues) {
  ServiceTopology topo;
  std::vector<ParseIssue> local;
  auto fail = [&](int line, Errc code, std::string msg) {
    local.push_back(ParseIssue{line, code, std::move(msg)});
  };

  struct PendingEdge {
    Edge edge;
    int line;
  };
  std::vector<PendingEdge> pending_edges;
  int entry_line = 0;

  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string_view line =
        (eol == std::string_view::npos) ? text.substr(pos) : text.substr(pos, eol - pos);
    pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
    line_no++;
    auto toks = tokenize(line);
    if (toks.empty()) continue;

    if (toks[0] == "service") {
      // service <name> role <role> port <p> workers <w> queue <q> cost <c> slowdown <f>
      if (toks.size() != 14) {
        fail(line_no, Errc::syntax_error, "service line needs 14 tokens");
        continue;
      }
      if (toks[2] != "role" || toks[4] != "port" || toks[6] != "workers" || toks[8] != "queue" ||
          toks[10] != "cost" || toks[12] != "slowdown") {
        fail(line_no, Errc::syntax_error,
             "service line keywords must be role/port/workers/queue/cost/slowdown");
        continue;
      }
      ServiceSpec spec;
      spec.name = toks[1];
      if (!role_from_name(toks[3], &spec.role)) {
        fail(line_no, Errc::unknown_role, "unknown role '" + toks[3] + "'");
        continue;
      }
      long port = 0, workers = 0, queue = 0;
      double cost = 0, slowdown = 0;
      bool ok = parse_long(toks[5], &port) && port > 0 && port <= 65535;
      ok = ok && parse_long(toks[7], &workers) && workers >= 1;
      ok = ok && parse_long(toks[9], &queue) && queue >= 1;
      ok = ok && parse_double(toks[11], &cost) && cost >= 0;
      ok = ok && parse_double(toks[13], &slowdown) && slowdown > 0;
      if (!ok) {
        fail(line_no, Errc::syntax_error, "bad numeric field in service '" + spec.name + "'");
        continue;
      }
      spec.port = static_cast<uint16_t>(port);
      spec.workers = static_cast<int>(workers);
      spec.queue_capacity = static_cast<int>(queue);
      spec.compute_cost = cost;
      spec.slowdown = slowdown;
      if (topo.find(spec.name) != nullptr) {
        fail(line_no, Errc::duplicate_service, "duplicate service '" + spec.name + "'");
        continue;
      }
      topo.services.push_back(std::move(spec));
    } else if (toks[0] == "edge") {
      if (toks.size() != 4) {
        fail(line_no, Errc::syntax_error, "edge line needs: edge <caller> <callee> <parallel|serial>");
        continue;
      }
      Edge e;
      e.caller = toks[1];
      e.callee = toks[2];
      if (toks[3] == "parallel") {
        e.mode = EdgeMode::parallel;
      } else if (toks[3] == "serial") {
        e.mode = EdgeMode::serial;
      } else {
        fail(line_no, Errc::syntax_error, "edge mode must be parallel or serial");
        continue;
      }
      pending_edges.push_back({std::move(e), line_no});
    } else if (toks[0] == "entry") {
      if (toks.size() != 2) {
        fail(line_no, Errc::syntax_error, "entry line needs: entry <name>");
        continue;
      }
      topo.entry = toks[1];
      entry_line = line_no;
    } else {
      fail(line_no, Errc::syntax_error, "unknown declaration '" + toks[0] + "'");
    }
  }

  for (auto& pe : pending_edges) {
    if (topo.find(pe.edge.caller) == nullptr) {
      fail(pe.line, Errc::unknown_service, "unknown service '" + pe.edge.caller + "'");
      continue;
    }
    if (topo.find(pe.edge.callee) == nullptr) {
      fail(pe.line, Errc::unknown_service, "unknown service '" + pe.edge.callee + "'");
      continue;
    }
    topo.edges.push_back(std::move(pe.edge));
  }
  if (!topo.entry.empty() && topo.find(topo.entry) == nullptr) {
    fail(entry_line, Errc::unknown_service, "unknown entry service '" + topo.entry + "'");
  }

  if (issues) *issues = local;
  if (!local.empty()) {
    std::string msg = "line " + std::to_string(local[0].line) + ": " + local[0].message;
    if (local.size() > 1) msg += " (+" + std::to_string(local.size() - 1) + " more)";
    return Error{local[0].code, std::move(msg)};
  }
  return topo;
}

namespace {
std::string format_double(double v) {
  char buf[64];
  snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}
}  // namespace

std::string serialize_topology(const ServiceTopology& t) {
  std::string out;
  for (const auto& s : t.services) {
    out += "service " + s.name + " role " + role_name(s.role) + " port " + std::to_string(s.port) +
           " workers " + std::to_string(s.workers) + " queue " + std::to_string(s.queue_capacity) +
           " cost " + format_double(s.compute_cost) + " slowdown " + format_double(s.slowdown) +
           "\n";
  }
  for (const auto& e : t.edges) {
    out += "edge " + e.caller + " " + e.callee + " " +
           (e.mode == EdgeMode::parallel ? "parallel" : "serial") + "\n";
  }
  if (!t.entry.empty()) out += "entry " + t.entry + "\n";
  return out;
}

std::vector<Violation> validate(const ServiceTopology& t) {
  std::vector<Violation> v;

  std::map<std::string, int> name_count;
  std::map<uint16_t, std::vector<std::string>> port_users;
  for (const auto& s : t.services) {
    name_count[s.name]++;
    port_users[s.port].push_back(s.name);
    if (s.slowdown <= 0) {
      v.push_back({Errc::invalid_argument, s.name, "slowdown must be > 0"});
    }
    if (s.workers < 1) v.push_back({Errc::invalid_argument, s.name, "workers must be >= 1"});
    if (s.queue_capacity < 1) {
      v.push_back({Errc::invalid_argument, s.name, "queue capacity must be >= 1"});
    }
    if (s.compute_cost < 0) v.push_back({Errc::invalid_argument, s.name, "cost must be >= 0"});
    if (s.port == 0) v.push_back({Errc::invalid_argument, s.name, "port must be nonzero"});
  }
  for (const auto& [name, count] : name_count) {
    if (count > 1) v.push_back({Errc::duplicate_service, name, "declared " + std::to_string(count) + " times"});
  }
  for (const auto& [port, users] : port_users) {
    if (users.size() > 1) {
      std::string who;
      for (const auto& u : users) {
        if (!who.empty()) who += ", ";
        who += u;
      }
      v.push_back({Errc::port_collision, users[0], "port " + std::to_string(port) + " shared by " + who});
    }
  }

  for (const auto& e : t.edges) {
    if (t.find(e.caller) == nullptr) {
      v.push_back({Errc::unknown_service, e.caller, "edge caller not declared"});
    }
    if (t.find(e.callee) == nullptr) {
      v.push_back({Errc::unknown_service, e.callee, "edge callee not declared"});
    }
  }
  if (t.entry.empty()) {
    v.push_back({Errc::unknown_service, "entry", "entry not declared"});
  } else if (t.find(t.entry) == nullptr) {
    v.push_back({Errc::unknown_service, t.entry, "entry not a declared service"});
  }

  // Cycle check: iterative DFS with tricolor marking; reports one cycle with
  // its member list.
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : t.edges) adj[e.caller].push_back(e.callee);
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  std::vector<std::string> stack_path;

  auto dfs = [&](const std::string& start, auto&& self) -> bool {
    color[start] = 1;
    stack_path.push_back(start);
    for (const auto& next : adj[start]) {
      if (t.find(next) == nullptr) continue;
      int c = color[next];
      if (c == 1) {
        std::string members;
        bool in_cycle = false;
        for (const auto& n : stack_path) {
          if (n == next) in_cycle = true;
          if (in_cycle) {
            if (!members.empty()) members += ", ";
            members += n;
          }
        }
        v.push_back({Errc::cycle, next, "cycle through [" + members + "]"});
        stack_path.pop_back();
        color[start] = 2;
        return true;
      }
      if (c == 0 && self(next, self)) {
        stack_path.pop_back();
        color[start] = 2;
        return true;
      }
    }
    stack_path.pop_back();
    color[start] = 2;
    return false;
  };
  for (const auto& s : t.services) {
    if (color[s.name] == 0) {
      if (dfs(s.name, dfs)) break;  // one cycle report is enough
    }
  }
  return v;
}

}  // namespace moviebench
