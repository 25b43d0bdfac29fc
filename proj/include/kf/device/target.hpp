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

#ifndef KF_DEVICE_TARGET_HPP_
#define KF_DEVICE_TARGET_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kf/device/intrinsics.hpp"
#include "kf/frontend/interpreter.hpp"
#include "kf/frontend/method_table.hpp"
#include "kf/hir/inference.hpp"
#include "kf/lir/codegen.hpp"
#include "kf/lir/passes.hpp"

namespace kf::device {

struct DeviceTargetConfig {
  DeviceTargetConfig();

  hir::InferenceParams inference;  // allow_any = false
  lir::CodegenParams codegen;      // Trap exceptions, Forbid allocation
  lir::PassOptions passes;         // pure_intrinsic is filled in by the target
  int warp_size = 32;
  uint64_t max_shared_bytes = 48 * 1024;
  // Stage switches, used to measure what each stage buys.
  bool rewrite_abi = true;
  bool infer_address_spaces = true;
};

// How one source argument reaches the kernel's param buffer.
struct ParamSlot {
  enum class Kind : uint8_t {
    kScalar,       // the value itself
    kByValue,      // aggregate bytes copied into the buffer
    kByReference,  // generic pointer to a copy in global memory
  };
  Kind kind = Kind::kScalar;
  size_t source_arg = 0;
  Type type;
  uint64_t offset = 0;
  uint64_t size = 0;
};

struct CompileStats {
  size_t hir_statements = 0;
  size_t lir_instructions_unoptimized = 0;
  size_t lir_instructions = 0;
  size_t generic_memory_ops = 0;
  size_t calls = 0;
};

struct CompiledKernel {
  std::string name;
  std::vector<Type> arg_types;
  lir::Module module;
  // Every call resolved during inference, with the definition age it saw.
  std::vector<hir::Dependency> deps;
  std::vector<ParamSlot> params;
  uint64_t param_bytes = 0;
  uint64_t shared_bytes = 0;
  int warp_size = 32;
  CompileStats stats;

  const lir::Function& entry() const { return module.entry_function(); }
};

struct Violation {
  std::string function;
  std::string message;
  SourceSpan span;
};

// The generic device standard library: Dim3 and the thread geometry
// accessors, sync_threads, and abs/sqrt/pow over the width-specific
// intrinsics. Shared by every DeviceTarget.
const MethodTable& device_stdlib();

// Zero-based position of one thread, for the reference semantics.
struct ThreadPosition {
  Dim3i thread{0, 0, 0};
  Dim3i block{0, 0, 0};
  Dim3i block_dim;
  Dim3i grid_dim;
  int64_t warp_size = 32;
};

// Wires the device stdlib and intrinsics into the published inference and
// codegen hooks. Holds no per-kernel state.
class DeviceTarget {
 public:
  explicit DeviceTarget(DeviceTargetConfig config = {});

  const DeviceTargetConfig& config() const { return config_; }
  hir::InferenceHooks inference_hooks() const;
  lir::CodegenHooks codegen_hooks() const;
  lir::PassOptions pass_options() const;
  // Interpreter options that give one thread the device's view: stdlib
  // overlay plus intrinsics evaluated for `pos`.
  InterpreterOptions reference_options(const ThreadPosition& pos) const;

 private:
  DeviceTargetConfig config_;
};

// Text of the intermediate stages, for tooling.
struct CompileTrace {
  std::string hir;      // inferred kernel body
  std::string lir;      // lowered, before any pass
  std::string lir_opt;  // after the ABI rewrite and the pass pipeline
};

// specialize -> lower_hir -> rewrite_kernel_abi -> run_passes ->
// infer_address_spaces -> validate_device. Throws on the first failing stage.
CompiledKernel compile_kernel(const MethodTable& table, std::string_view name,
                              const std::vector<Type>& arg_types,
                              const DeviceTarget& target,
                              CompileTrace* trace = nullptr);
CompiledKernel compile_kernel(const MethodTable& table, std::string_view name,
                              const std::vector<Type>& arg_types,
                              const DeviceTargetConfig& config = {});

std::vector<Violation> validate_device(const lir::Module& module);

// Runs every thread of a grid sequentially through the reference
// interpreter, blocks and threads in row-major order. Arrays in `args` are
// host arrays and are mutated in place. shared_array yields a private array
// per call and shfl_down is rejected, so only kernels without cross-thread
// communication have a meaningful sequential reference.
void run_reference_grid(const MethodTable& table, std::string_view name,
                        const std::vector<Value>& args, Dim3i grid,
                        Dim3i block, const DeviceTarget& target);

}  // namespace kf::device

#endif  // KF_DEVICE_TARGET_HPP_
