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

#ifndef KF_RUNTIME_RUNTIME_HPP_
#define KF_RUNTIME_RUNTIME_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "kf/device/target.hpp"
#include "kf/frontend/value.hpp"
#include "kf/vm/device.hpp"

namespace kf::runtime {

// A device array owned by one context. Handles are plain values; the
// context's allocation table decides whether one is still usable.
struct ArrayHandle {
  uint64_t context = 0;
  uint64_t region = 0;
  Type element;
  int64_t length = 0;

  Type device_type() const {
    return Type::device_array(element, AddressSpace::kGlobal);
  }
};

// Host-side wrapper so handles can flow through interpreted host code.
class DeviceArrayObject final : public OpaqueObject {
 public:
  explicit DeviceArrayObject(ArrayHandle h) : handle_(h) {}
  Type type() const override;
  std::string describe() const override;
  const ArrayHandle& handle() const { return handle_; }

 private:
  ArrayHandle handle_;
};

Value wrap_handle(const ArrayHandle& h);
std::optional<ArrayHandle> as_handle(const Value& v);

// Scalars, immutable records of scalars, or device arrays.
using KernelArg = std::variant<Value, ArrayHandle>;

struct KernelCacheKey {
  uint64_t method_id = 0;
  std::vector<Type> arg_types;
  uint64_t fingerprint = 0;  // ages of the method and its callee set
  uint64_t context = 0;

  friend bool operator==(const KernelCacheKey&, const KernelCacheKey&) = default;
};

struct KernelCacheKeyHash {
  size_t operator()(const KernelCacheKey& k) const;
};

struct CacheStats {
  uint64_t hits = 0;
  uint64_t misses = 0;
  uint64_t compiles = 0;
  uint64_t launches = 0;
};

struct ContextOptions {
  vm::DeviceLimits limits;
  vm::CostTable costs;
  device::DeviceTargetConfig target;
  // Compile on every launch; the oracle for cache correctness.
  bool bypass_cache = false;
};

class DeviceContext {
 public:
  explicit DeviceContext(ContextOptions options = {});
  DeviceContext(const DeviceContext&) = delete;
  DeviceContext& operator=(const DeviceContext&) = delete;

  uint64_t id() const { return id_; }
  vm::DeviceState& state() { return state_; }
  const vm::DeviceState& state() const { return state_; }
  const device::DeviceTarget& target() const { return target_; }
  const ContextOptions& options() const { return options_; }
  void set_bypass_cache(bool on) { options_.bypass_cache = on; }

  // Memory. Misuse throws Error(kHandle).
  ArrayHandle upload(const Value& host_array);
  template <typename T>
  ArrayHandle upload(const std::vector<T>& data) {
    return upload(array_from(data));
  }
  Value download(const ArrayHandle& h) const;
  template <typename T>
  std::vector<T> download_as(const ArrayHandle& h) const {
    return array_to<T>(download(h));
  }
  ArrayHandle allocate(Type element, int64_t length);
  ArrayHandle similar(const ArrayHandle& h);
  void free(const ArrayHandle& h);
  bool is_live(const ArrayHandle& h) const;
  size_t live_regions() const;

  // Returns the cached kernel for these argument types, compiling on a
  // miss. The fast path resolves methods but runs no inference or codegen.
  std::shared_ptr<const device::CompiledKernel> kernel(
      const MethodTable& table, std::string_view name,
      const std::vector<Type>& arg_types);
  // Converts handles to descriptors, fetches the kernel, marshals params
  // into Param space and runs it on the VM.
  vm::ExecutionReport launch(const MethodTable& table, std::string_view name,
                             const std::vector<KernelArg>& args,
                             const vm::LaunchConfig& config);

  CacheStats stats() const;
  size_t cached_kernels() const;
  // The key the next launch would use, or nullopt if (name, types) was
  // never compiled here.
  std::optional<KernelCacheKey> current_key(const MethodTable& table,
                                            std::string_view name,
                                            const std::vector<Type>& arg_types) const;

 private:
  struct Region {
    uint64_t offset = 0;
    Type element;
    int64_t length = 0;
    bool live = true;
  };
  struct Partial {
    uint64_t method_id;
    std::vector<Type> arg_types;
    friend bool operator==(const Partial&, const Partial&) = default;
  };
  struct PartialHash {
    size_t operator()(const Partial& p) const;
  };

  const Region& region(const ArrayHandle& h) const;
  Type arg_type(const KernelArg& arg) const;
  void write_arg(const KernelArg& arg, uint8_t* dst) const;
  std::optional<uint64_t> fingerprint(const MethodTable& table, const Method& m,
                                      const std::vector<hir::Dependency>& deps) const;
  MethodPtr resolve(const MethodTable& table, std::string_view name,
                    const std::vector<Type>& types) const;

  uint64_t id_;
  ContextOptions options_;
  device::DeviceTarget target_;
  vm::DeviceState state_;
  std::map<uint64_t, Region> regions_;
  uint64_t next_region_ = 1;

  mutable std::shared_mutex cache_mutex_;
  std::unordered_map<KernelCacheKey, std::shared_ptr<const device::CompiledKernel>,
                     KernelCacheKeyHash>
      cache_;
  // Callee set of the last compile per (method, types), to recompute the
  // fingerprint without running inference.
  std::unordered_map<Partial, std::vector<hir::Dependency>, PartialHash> deps_;
  CacheStats stats_;
};

// Process default context, created on first use.
DeviceContext& default_context();

vm::ExecutionReport cuda_launch(DeviceContext& ctx, const MethodTable& table,
                                std::string_view name,
                                const std::vector<KernelArg>& args,
                                const vm::LaunchConfig& config);

// Array files: 8-byte little-endian element count, then raw little-endian
// elements.
void write_array_file(const std::filesystem::path& path, const Value& host_array);
Value read_array_file(const std::filesystem::path& path, Type element);

}  // namespace kf::runtime

#endif  // KF_RUNTIME_RUNTIME_HPP_
