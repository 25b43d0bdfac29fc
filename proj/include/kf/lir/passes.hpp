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

#ifndef KF_LIR_PASSES_HPP_
#define KF_LIR_PASSES_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "kf/lir/lir.hpp"

namespace kf::lir {

struct PassOptions {
  // Calls to functions not marked inline-always are inlined while the
  // nesting depth stays below this budget.
  int max_inline_depth = 8;
  // Intrinsics for which this returns true may be deleted when unused.
  std::function<bool(std::string_view name)> pure_intrinsic;
};

// Individual passes. Each keeps the module verifiable.
void inline_calls(Module& module, const PassOptions& options = {});
void slot_promote(Function& fn);
void constant_fold(Function& fn);
void dead_code_eliminate(Function& fn, const PassOptions& options = {});
void simplify_cfg(Function& fn);
// Renumbers values and blocks densely in program order.
void renumber(Function& fn);

// Runs the named passes in order, verifying after each one. Known names:
// inline, slot-promote, constfold, dce, simplify-cfg, renumber.
void run_passes(Module& module, const std::vector<std::string>& pipeline,
                const PassOptions& options = {});
const std::vector<std::string>& default_pipeline();

// Retags Generic loads and stores whose address provably derives from a
// Global, Shared, Param or Local root.
void infer_address_spaces(Function& fn);

// Splits the entry kernel into a wrapper that takes immutable aggregates by
// value in Param space and the original function, now inline-always, which
// receives pointers to Local copies. The wrapper becomes the module entry.
struct AbiRewrite {
  std::string wrapper;
  std::string inner;
};
AbiRewrite rewrite_kernel_abi(Module& module);

// Shared helpers.
void replace_uses(Function& fn, const std::vector<ValueId>& replacement);
void remove_unreachable_blocks(Function& fn);
size_t count_ops(const Function& fn, Op op);

}  // namespace kf::lir

#endif  // KF_LIR_PASSES_HPP_
