// Copyright (c) 2026 The moviebench Authors
// Licensed under the Apache 2.0 license found in the LICENSE file or at:
//     https://opensource.org/licenses/Apache-2.0

#pragma once

#include <cstdint>
#include <string_view>

namespace moviebench {

// Burns CPU proportionally to |payload| * cost_ns_per_byte / slowdown by
// iterating a mixing digest over the payload, and returns the digest so the
// work cannot be elided. The iteration count is a pure function of the
// arguments (not of wall time), which keeps the digest reproducible across
// processes and machines; absolute duration tracks the target only as well
// as the fixed ops-per-ns constant matches the host, but linearity in
// |payload| and 1/slowdown holds regardless.
uint64_t synthetic_compute(std::string_view payload, double cost_ns_per_byte, double slowdown);

// Iterations executed for the given arguments (exposed for tests).
uint64_t synthetic_compute_iterations(size_t payload_size, double cost_ns_per_byte,
                                      double slowdown);

}  // namespace moviebench
