// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moviebench/common.hpp"

namespace moviebench {

enum class ServiceRole : uint8_t { frontend, logic, cache, store, blob };

const char* role_name(ServiceRole r);
bool role_from_name(std::string_view s, ServiceRole* out);

struct ServiceSpec {
  std::string name;
  ServiceRole role = ServiceRole::logic;
  uint16_t port = 0;
  int workers = 1;
  int queue_capacity = 1;
  double compute_cost = 0.0;  // ns per byte of handler payload
  double slowdown = 1.0;      // 1.0 = nominal; smaller = slower

  friend bool operator==(const ServiceSpec&, const ServiceSpec&) = default;
};

enum class EdgeMode : uint8_t { parallel, serial };

struct Edge {
  std::string caller;
  std::string callee;
  EdgeMode mode = EdgeMode::serial;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct ServiceTopology {
  std::vector<ServiceSpec> services;
  std::vector<Edge> edges;
  std::string entry;

  const ServiceSpec* find(std::string_view name) const;
  std::vector<const Edge*> out_edges(std::string_view caller) const;

  friend bool operator==(const ServiceTopology&, const ServiceTopology&) = default;
};

// Line-oriented config:
//   service <name> role <role> port <p> workers <w> queue <q> cost <ns-per-byte> slowdown <f>
//   edge <caller> <callee> <parallel|serial>
//   entry <name>
// '#' starts a comment. Declarations may appear in any order.
struct ParseIssue {
  int line = 0;
  Errc code = Errc::syntax_error;
  std::string message;
};

Result<ServiceTopology> parse_topology(std::string_view text,
                                       std::vector<ParseIssue>* issues = nullptr);
std::string serialize_topology(const ServiceTopology& t);

struct Violation {
  Errc kind = Errc::internal;  // cycle, port_collision, duplicate_service, unknown_service, ...
  std::string element;
  std::string message;
};

// Empty list iff all topology invariants hold.
std::vector<Violation> validate(const ServiceTopology& t);

}  // namespace moviebench
