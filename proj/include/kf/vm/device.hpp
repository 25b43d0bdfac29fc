// Copyright 2026 The KernelForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KF_VM_DEVICE_HPP_
#define KF_VM_DEVICE_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "kf/device/target.hpp"
#include "kf/vm/cost_table.hpp"

namespace kf::vm {

using device::Dim3i;

struct LaunchConfig {
  Dim3i grid;
  Dim3i block;
  // Dynamic shared memory on top of the kernel's static allocations.
  uint64_t shared_bytes = 0;
};

struct DeviceLimits {
  uint64_t global_capacity = uint64_t{1} << 30;
  uint64_t max_shared_bytes = 48 * 1024;
  uint64_t local_bytes_per_thread = 64 * 1024;
  uint32_t max_threads_per_block = 1024;
  size_t max_reconvergence_depth = 256;
  size_t max_call_depth = 64;
  // Warp instructions per launch before giving up; 0 means unlimited.
  uint64_t step_limit = 500'000'000;
  // Verify that every rejoin restores exactly the lanes that diverged.
  bool check_masks = true;
};

// Unified addresses: each state space owns a window; generic pointers
// carry the window in their upper bits. Space-typed pointers hold plain
// offsets into their space.
inline constexpr int kWindowShift = 40;
inline constexpr uint64_t window_base(AddressSpace s) {
  return static_cast<uint64_t>(s) << kWindowShift;
}

struct EventCounters {
  // Per lane, indexed by the instruction's space tag.
  std::array<uint64_t, kNumAddressSpaces> loads{};
  std::array<uint64_t, kNumAddressSpaces> stores{};
  // Warp-level memory instructions, by tag.
  std::array<uint64_t, kNumAddressSpaces> warp_memory_ops{};
  uint64_t shuffles = 0;  // one per 32-bit word per warp
  uint64_t barriers = 0;  // one per warp arriving
  uint64_t atomics = 0;   // per lane
  uint64_t traps = 0;     // per lane
  uint64_t warp_instructions = 0;
  uint64_t lane_instructions = 0;
  uint64_t divergent_branches = 0;
  uint64_t max_stack_depth = 0;

  uint64_t generic_events() const {
    return loads[0] + stores[0];
  }
  EventCounters& operator+=(const EventCounters& o);
  nlohmann::json to_json() const;
};

struct TrapReport {
  Dim3i block;
  Dim3i thread;
  int64_t code = 0;
};

struct ExecutionReport {
  std::string kernel;
  LaunchConfig config;
  uint64_t cycles = 0;
  EventCounters events;
  std::vector<TrapReport> traps;

  bool trapped() const { return !traps.empty(); }
  nlohmann::json to_json() const;
};

// The virtual GPU. Global memory persists across launches; everything else
// lives for one launch. Not thread-safe: one state per OS thread.
class DeviceState {
 public:
  explicit DeviceState(DeviceLimits limits = {}, CostTable costs = {});

  // Zero-filled region of global memory; returns its offset.
  uint64_t allocate(uint64_t bytes);
  void free(uint64_t offset);
  bool is_live(uint64_t offset) const;
  uint64_t region_size(uint64_t offset) const;
  void write(uint64_t offset, std::span<const uint8_t> bytes);
  std::vector<uint8_t> read(uint64_t offset, uint64_t size) const;
  uint64_t bytes_in_use() const { return in_use_; }

  const DeviceLimits& limits() const { return limits_; }
  const CostTable& costs() const { return costs_; }
  void set_costs(const CostTable& c) { costs_ = c; }
  // Totals over every launch on this state.
  const EventCounters& lifetime_events() const { return lifetime_; }
  uint64_t lifetime_cycles() const { return lifetime_cycles_; }
  uint64_t launches() const { return launches_; }

  // Checked access to global memory, throwing Error(kMemory).
  uint8_t* global_span(uint64_t offset, uint64_t size, const char* what);

 private:
  friend ExecutionReport launch(DeviceState&, const device::CompiledKernel&,
                                const LaunchConfig&,
                                std::span<const uint8_t>);
  void check_global(uint64_t offset, uint64_t size, const char* what) const;

  struct Region {
    uint64_t size = 0;
    bool live = true;
  };

  DeviceLimits limits_;
  CostTable costs_;
  std::vector<uint8_t> global_;
  std::map<uint64_t, Region> regions_;
  uint64_t top_ = 256;  // offset 0 stays unmapped
  uint64_t in_use_ = 0;
  EventCounters lifetime_;
  uint64_t lifetime_cycles_ = 0;
  uint64_t launches_ = 0;
};

// Runs `kernel` over the grid. Blocks run one after another in row-major
// order; inside a block, warps take turns one instruction at a time.
// Traps end the launch and are reported; faults, barrier divergence and
// malformed launches throw.
ExecutionReport launch(DeviceState& state, const device::CompiledKernel& kernel,
                       const LaunchConfig& config,
                       std::span<const uint8_t> param_bytes);

}  // namespace kf::vm

#endif  // KF_VM_DEVICE_HPP_
