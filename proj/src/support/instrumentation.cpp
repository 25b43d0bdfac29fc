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

#include "kf/support/instrumentation.hpp"

namespace kf {

CompilerCounters& compiler_counters() {
  static CompilerCounters counters;
  return counters;
}

CounterSnapshot CounterSnapshot::take() {
  CompilerCounters& c = compiler_counters();
  return {c.inference_runs.load(), c.lowering_runs.load(),
          c.codegen_runs.load(), c.kernel_compiles.load()};
}

CounterSnapshot CounterSnapshot::operator-(const CounterSnapshot& o) const {
  return {inference_runs - o.inference_runs, lowering_runs - o.lowering_runs,
          codegen_runs - o.codegen_runs, kernel_compiles - o.kernel_compiles};
}

}  // namespace kf
