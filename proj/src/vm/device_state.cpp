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

#include <cstring>

#include <fmt/format.h>

#include "kf/vm/device.hpp"

namespace kf::vm {

EventCounters& EventCounters::operator+=(const EventCounters& o) {
  for (int s = 0; s < kNumAddressSpaces; ++s) {
    loads[s] += o.loads[s];
    stores[s] += o.stores[s];
    warp_memory_ops[s] += o.warp_memory_ops[s];
  }
  shuffles += o.shuffles;
  barriers += o.barriers;
  atomics += o.atomics;
  traps += o.traps;
  warp_instructions += o.warp_instructions;
  lane_instructions += o.lane_instructions;
  divergent_branches += o.divergent_branches;
  max_stack_depth = std::max(max_stack_depth, o.max_stack_depth);
  return *this;
}

nlohmann::json EventCounters::to_json() const {
  nlohmann::json j;
  nlohmann::json ld = nlohmann::json::object(), st = nlohmann::json::object(),
                 wm = nlohmann::json::object();
  for (int s = 0; s < kNumAddressSpaces; ++s) {
    std::string name(space_title(static_cast<AddressSpace>(s)));
    ld[name] = loads[s];
    st[name] = stores[s];
    wm[name] = warp_memory_ops[s];
  }
  j["loads"] = ld;
  j["stores"] = st;
  j["warp_memory_ops"] = wm;
  j["shuffles"] = shuffles;
  j["barriers"] = barriers;
  j["atomics"] = atomics;
  j["traps"] = traps;
  j["warp_instructions"] = warp_instructions;
  j["lane_instructions"] = lane_instructions;
  j["divergent_branches"] = divergent_branches;
  j["max_stack_depth"] = max_stack_depth;
  return j;
}

nlohmann::json ExecutionReport::to_json() const {
  auto dim = [](const Dim3i& d) { return nlohmann::json::array({d.x, d.y, d.z}); };
  nlohmann::json j;
  j["kernel"] = kernel;
  j["grid"] = dim(config.grid);
  j["block"] = dim(config.block);
  j["shared_bytes"] = config.shared_bytes;
  j["cycles"] = cycles;
  j["events"] = events.to_json();
  nlohmann::json traps_json = nlohmann::json::array();
  for (const TrapReport& t : traps) {
    traps_json.push_back(
        {{"block", dim(t.block)}, {"thread", dim(t.thread)}, {"code", t.code}});
  }
  j["traps"] = traps_json;
  return j;
}

DeviceState::DeviceState(DeviceLimits limits, CostTable costs)
    : limits_(limits), costs_(costs) {}

uint64_t DeviceState::allocate(uint64_t bytes) {
  uint64_t offset = top_;
  uint64_t end = offset + (bytes + 15) / 16 * 16;
  if (bytes > limits_.global_capacity || end > limits_.global_capacity) {
    throw Error(ErrorKind::kMemory,
                fmt::format("out of device memory: {} bytes requested, {} of {} "
                            "in use",
                            bytes, in_use_, limits_.global_capacity));
  }
  // Zero-length regions still get a distinct address.
  top_ = std::max(end, offset + 16);
  if (global_.size() < top_) global_.resize(top_, 0);
  regions_[offset] = Region{bytes, true};
  in_use_ += bytes;
  return offset;
}

void DeviceState::free(uint64_t offset) {
  auto it = regions_.find(offset);
  if (it == regions_.end()) {
    throw Error(ErrorKind::kHandle,
                fmt::format("no region at global offset {:#x}", offset));
  }
  if (!it->second.live) {
    throw Error(ErrorKind::kHandle, "region already freed");
  }
  it->second.live = false;
  in_use_ -= it->second.size;
}

bool DeviceState::is_live(uint64_t offset) const {
  auto it = regions_.find(offset);
  return it != regions_.end() && it->second.live;
}

uint64_t DeviceState::region_size(uint64_t offset) const {
  auto it = regions_.find(offset);
  return it == regions_.end() ? 0 : it->second.size;
}

void DeviceState::check_global(uint64_t offset, uint64_t size,
                               const char* what) const {
  auto it = regions_.upper_bound(offset);
  bool ok = it != regions_.begin();
  if (ok) {
    --it;
    ok = it->second.live && offset + size >= offset &&
         offset + size <= it->first + it->second.size;
  }
  if (!ok) {
    throw Error(ErrorKind::kMemory,
                fmt::format("{} of {} bytes at Global offset {:#x} is outside "
                            "every live region",
                            what, size, offset));
  }
}

uint8_t* DeviceState::global_span(uint64_t offset, uint64_t size,
                                  const char* what) {
  check_global(offset, size, what);
  return global_.data() + offset;
}

void DeviceState::write(uint64_t offset, std::span<const uint8_t> bytes) {
  if (bytes.empty()) return;
  std::memcpy(global_span(offset, bytes.size(), "write"), bytes.data(),
              bytes.size());
}

std::vector<uint8_t> DeviceState::read(uint64_t offset, uint64_t size) const {
  std::vector<uint8_t> out(size);
  if (size == 0) return out;
  check_global(offset, size, "read");
  std::memcpy(out.data(), global_.data() + offset, size);
  return out;
}

}  // namespace kf::vm
