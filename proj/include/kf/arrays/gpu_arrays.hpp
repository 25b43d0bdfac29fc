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

#ifndef KF_ARRAYS_GPU_ARRAYS_HPP_
#define KF_ARRAYS_GPU_ARRAYS_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "kf/frontend/ast.hpp"
#include "kf/runtime/runtime.hpp"

namespace kf::arrays {

inline constexpr int64_t kBlockSize = 256;

// Turns a dotted expression such as `f.(2 .* X.^2 .- sqrt.(X))` into an
// element method of one parameter per entry of `inputs` (the array
// variables, in order) and defines it in `table`. Structurally identical
// expressions share one method. Returns its name.
std::string fuse(MethodTable& table, const ast::Expr& dotted,
                 const std::vector<std::string>& inputs);
std::string fuse(MethodTable& table, std::string_view dotted_source,
                 const std::vector<std::string>& inputs);

struct BroadcastPlan {
  std::string element_fn;
  std::string kernel;  // generated guard-indexed kernel method
  std::vector<runtime::ArrayHandle> inputs;
  runtime::ArrayHandle output;
  vm::LaunchConfig config;
};

// Infers the element type, allocates the output and defines the kernel.
BroadcastPlan plan_broadcast(runtime::DeviceContext& ctx, MethodTable& table,
                             std::string_view element_fn,
                             const std::vector<runtime::ArrayHandle>& inputs);
// Empty inputs launch nothing and return an empty report.
vm::ExecutionReport execute(runtime::DeviceContext& ctx, const MethodTable& table,
                            const BroadcastPlan& plan);

runtime::ArrayHandle broadcast_apply(runtime::DeviceContext& ctx,
                                     MethodTable& table,
                                     std::string_view element_fn,
                                     const std::vector<runtime::ArrayHandle>& inputs,
                                     vm::ExecutionReport* report = nullptr);

struct ReduceOptions {
  // Combine block partials with one atomic add instead of further
  // launches. Only for Int32/Int64 sums with `op` "+" and neutral 0.
  bool atomic = false;
};

struct ReduceResult {
  Value value;
  std::vector<vm::ExecutionReport> launches;
};

// `op` is a method name or a binary operator token ("+", "*").
ReduceResult reduce(runtime::DeviceContext& ctx, MethodTable& table,
                    std::string_view op, const Value& neutral,
                    const runtime::ArrayHandle& input, ReduceOptions options = {});

}  // namespace kf::arrays

#endif  // KF_ARRAYS_GPU_ARRAYS_HPP_
