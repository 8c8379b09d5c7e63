// Copyright 2026 The ddosguard Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DDOSGUARD_QUEUE_HPP_
#define DDOSGUARD_QUEUE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ddosguard {

/// FIFO occupancy of the interface buffer. The first l1 packets are the
/// normal-operation region; l2 extra packets absorb an attack while sources
/// are being measured.
struct BufferState {
  std::uint64_t occupancy = 0;
  std::uint64_t l1 = 0;
  std::uint64_t l2 = 0;
  std::uint64_t cumulative_offered = 0;
  std::uint64_t cumulative_dropped = 0;
  std::uint64_t cumulative_served = 0;
  std::uint64_t peak_occupancy = 0;
  std::int64_t peak_slot = -1;
  std::int64_t slots_stepped = 0;
  /// Unused fractional service carried between slots, in [0, 1).
  double service_carry = 0.0;

  BufferState() = default;
  BufferState(std::uint64_t l1_size, std::uint64_t l2_size) : l1(l1_size), l2(l2_size) {}

  std::uint64_t capacity() const { return l1 + l2; }
};

struct SlotOutcome {
  std::uint64_t admitted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t served = 0;
  std::uint64_t occupancy_after = 0;
};

/// One slot: service first, then admission up to capacity. A non-integral
/// `service_per_slot` accumulates so the long-run busy service rate equals it
/// exactly; service capacity left unused by an empty buffer is not banked
/// beyond the fractional remainder.
inline SlotOutcome step(BufferState& state, std::uint64_t arrivals, double service_per_slot) {
  if (!(service_per_slot >= 0.0)) {
    throw std::invalid_argument("service_per_slot must be non-negative");
  }
  SlotOutcome out;
  const double budget = state.service_carry + service_per_slot;
  const double whole = std::floor(budget);
  state.service_carry = budget - whole;
  const auto capacity = static_cast<std::uint64_t>(whole);
  out.served = std::min(state.occupancy, capacity);
  state.occupancy -= out.served;

  const std::uint64_t room = state.capacity() - state.occupancy;
  out.admitted = std::min(arrivals, room);
  out.dropped = arrivals - out.admitted;
  state.occupancy += out.admitted;

  state.cumulative_offered += arrivals;
  state.cumulative_served += out.served;
  state.cumulative_dropped += out.dropped;
  if (state.occupancy > state.peak_occupancy || state.peak_slot < 0) {
    state.peak_occupancy = state.occupancy;
    state.peak_slot = state.slots_stepped;
  }
  ++state.slots_stepped;
  out.occupancy_after = state.occupancy;
  return out;
}

inline bool is_l1_full(const BufferState& state) { return state.occupancy >= state.l1; }

}  // namespace ddosguard

#endif  // DDOSGUARD_QUEUE_HPP_
