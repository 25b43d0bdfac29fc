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

#ifndef KF_VM_COST_TABLE_HPP_
#define KF_VM_COST_TABLE_HPP_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "kf/frontend/types.hpp"

namespace kf::vm {

// Cycle costs charged per warp-level instruction. The values are a model,
// not measurements: only their ordering matters.
struct CostTable {
  uint64_t arithmetic = 1;  // every instruction without a specific cost
  uint64_t local = 1;
  uint64_t param = 2;
  uint64_t shared = 4;
  uint64_t global = 20;
  // Extra cost of a Generic access for resolving its state space.
  uint64_t generic_surcharge = 20;
  uint64_t shuffle_per_word = 2;
  uint64_t barrier_per_warp = 10;
  uint64_t launch = 100;

  // Cost of an access that resolved to `space`; Generic-tagged accesses
  // additionally pay the surcharge.
  uint64_t memory(AddressSpace resolved, bool generic_tag) const;

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are errors.
  static CostTable from_json(const nlohmann::json& j);
  static CostTable load(const std::string& path);
};

}  // namespace kf::vm

#endif  // KF_VM_COST_TABLE_HPP_
