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

#ifndef KF_SUPPORT_INSTRUMENTATION_HPP_
#define KF_SUPPORT_INSTRUMENTATION_HPP_

#include <atomic>
#include <cstdint>

namespace kf {

// Process-wide compiler activity counters. Tests compare deltas.
struct CompilerCounters {
  std::atomic<uint64_t> inference_runs{0};
  std::atomic<uint64_t> lowering_runs{0};
  std::atomic<uint64_t> codegen_runs{0};
  std::atomic<uint64_t> kernel_compiles{0};
};

CompilerCounters& compiler_counters();

struct CounterSnapshot {
  uint64_t inference_runs = 0;
  uint64_t lowering_runs = 0;
  uint64_t codegen_runs = 0;
  uint64_t kernel_compiles = 0;

  static CounterSnapshot take();
  CounterSnapshot operator-(const CounterSnapshot& other) const;
};

}  // namespace kf

#endif  // KF_SUPPORT_INSTRUMENTATION_HPP_
