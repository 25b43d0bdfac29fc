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

#include "kf/runtime/runtime.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "kf/support/hash.hpp"

namespace kf::runtime {
namespace {

std::atomic<uint64_t> next_context_id{1};

uint64_t hash_types(uint64_t seed, const std::vector<Type>& types) {
  for (const Type& t : types) seed = hash_combine(seed, t.hash());
  return seed;
}

// Frees scratch regions on every exit path of a launch.
class ScratchRegions {
 public:
  explicit ScratchRegions(vm::DeviceState& state) : state_(state) {}
  ~ScratchRegions() {
    for (uint64_t off : regions_) state_.free(off);
  }
  uint64_t allocate(uint64_t bytes) {
    regions_.push_back(state_.allocate(bytes));
    return regions_.back();
  }

 private:
  vm::DeviceState& state_;
  std::vector<uint64_t> regions_;
};

}  // namespace

Type DeviceArrayObject::type() const {
  return Type::opaque(fmt::format("DeviceArray{{{}}}", handle_.element.str()));
}

std::string DeviceArrayObject::describe() const {
  return fmt::format("DeviceArray{{{}}}(length {}, region {} of context {})",
                     handle_.element.str(), handle_.length, handle_.region,
                     handle_.context);
}

Value wrap_handle(const ArrayHandle& h) {
  return Value::wrap(std::make_shared<DeviceArrayObject>(h));
}

std::optional<ArrayHandle> as_handle(const Value& v) {
  if (auto* obj = dynamic_cast<const DeviceArrayObject*>(v.opaque.get())) {
    return obj->handle();
  }
  return std::nullopt;
}

size_t KernelCacheKeyHash::operator()(const KernelCacheKey& k) const {
  uint64_t h = hash_combine(k.method_id, k.fingerprint);
  h = hash_combine(h, k.context);
  return static_cast<size_t>(hash_types(h, k.arg_types));
}

size_t DeviceContext::PartialHash::operator()(const Partial& p) const {
  return static_cast<size_t>(hash_types(mix64(p.method_id), p.arg_types));
}

DeviceContext::DeviceContext(ContextOptions options)
    : id_(next_context_id++),
      options_(std::move(options)),
      target_(options_.target),
      state_(options_.limits, options_.costs) {}

// ------------------------------------------------------------ memory

const DeviceContext::Region& DeviceContext::region(const ArrayHandle& h) const {
  if (h.context != id_) {
    throw Error(ErrorKind::kHandle,
                fmt::format("handle of context {} used in context {}",
                            h.context, id_));
  }
  auto it = regions_.find(h.region);
  if (it == regions_.end()) {
    throw Error(ErrorKind::kHandle, fmt::format("unknown region {}", h.region));
  }
  if (!it->second.live) {
    throw Error(ErrorKind::kHandle,
                fmt::format("use of freed region {}", h.region));
  }
  return it->second;
}

ArrayHandle DeviceContext::allocate(Type element, int64_t length) {
  if (length < 0) {
    throw Error(ErrorKind::kUsage, fmt::format("negative length {}", length));
  }
  if (!is_storable(element) || element.is_array()) {
    throw Error(ErrorKind::kUnsupported,
                fmt::format("{} cannot live in device memory", element.str()));
  }
  uint64_t bytes = static_cast<uint64_t>(length) * element.size_bytes();
  uint64_t off = state_.allocate(bytes);
  uint64_t id = next_region_++;
  regions_[id] = Region{off, element, length, true};
  return ArrayHandle{id_, id, element, length};
}

ArrayHandle DeviceContext::upload(const Value& host_array) {
  if (!host_array.array) {
    throw Error(ErrorKind::kUsage,
                fmt::format("upload expects a host array, got {}",
                            host_array.type.str()));
  }
  const ArrayObject& a = *host_array.array;
  ArrayHandle h = allocate(a.element, a.length);
  if (!a.bytes.empty()) state_.write(regions_[h.region].offset, a.bytes);
  return h;
}

Value DeviceContext::download(const ArrayHandle& h) const {
  const Region& r = region(h);
  Value v = Value::new_array(r.element, r.length);
  uint64_t bytes = static_cast<uint64_t>(r.length) * r.element.size_bytes();
  v.array->bytes = state_.read(r.offset, bytes);
  return v;
}

ArrayHandle DeviceContext::similar(const ArrayHandle& h) {
  const Region& r = region(h);
  return allocate(r.element, r.length);
}

void DeviceContext::free(const ArrayHandle& h) {
  if (h.context == id_) {
    auto it = regions_.find(h.region);
    if (it != regions_.end() && !it->second.live) {
      throw Error(ErrorKind::kHandle, "region already freed");
    }
  }
  region(h);
  Region& r = regions_[h.region];
  state_.free(r.offset);
  r.live = false;
}

bool DeviceContext::is_live(const ArrayHandle& h) const {
  if (h.context != id_) return false;
  auto it = regions_.find(h.region);
  return it != regions_.end() && it->second.live;
}

size_t DeviceContext::live_regions() const {
  return std::count_if(regions_.begin(), regions_.end(),
                       [](const auto& kv) { return kv.second.live; });
}

// ------------------------------------------------------------ kernels

MethodPtr DeviceContext::resolve(const MethodTable& table, std::string_view name,
                                 const std::vector<Type>& types) const {
  hir::InferenceHooks hooks = target_.inference_hooks();
  if (hooks.resolve_call) {
    if (MethodPtr m = hooks.resolve_call(name, types)) return m;
  }
  return table.find(name, types);
}

std::optional<uint64_t> DeviceContext::fingerprint(
    const MethodTable& table, const Method& m,
    const std::vector<hir::Dependency>& deps) const {
  std::vector<std::pair<uint64_t, uint64_t>> ages{{m.id, m.age}};
  for (const hir::Dependency& d : deps) {
    MethodPtr cur;
    try {
      cur = resolve(table, d.name, d.arg_types);
    } catch (const Error&) {
      return std::nullopt;  // now ambiguous: recompile and report there
    }
    ages.emplace_back(cur ? cur->id : 0, cur ? cur->age : 0);
  }
  std::sort(ages.begin(), ages.end());
  uint64_t h = mix64(ages.size());
  for (auto [id, age] : ages) h = hash_combine(hash_combine(h, id), age);
  return h;
}

std::optional<KernelCacheKey> DeviceContext::current_key(
    const MethodTable& table, std::string_view name,
    const std::vector<Type>& arg_types) const {
  MethodPtr m = resolve(table, name, arg_types);
  if (!m) return std::nullopt;
  std::shared_lock lock(cache_mutex_);
  auto it = deps_.find(Partial{m->id, arg_types});
  if (it == deps_.end()) return std::nullopt;
  auto fp = fingerprint(table, *m, it->second);
  if (!fp) return std::nullopt;
  return KernelCacheKey{m->id, arg_types, *fp, id_};
}

std::shared_ptr<const device::CompiledKernel> DeviceContext::kernel(
    const MethodTable& table, std::string_view name,
    const std::vector<Type>& arg_types) {
  if (!options_.bypass_cache) {
    if (auto key = current_key(table, name, arg_types)) {
      std::shared_lock lock(cache_mutex_);
      auto it = cache_.find(*key);
      if (it != cache_.end()) {
        stats_.hits++;
        return it->second;
      }
    }
  }
  auto k = std::make_shared<const device::CompiledKernel>(
      device::compile_kernel(table, name, arg_types, target_));
  stats_.misses++;
  stats_.compiles++;
  if (options_.bypass_cache) return k;
  MethodPtr m = resolve(table, name, arg_types);
  // Fingerprint from the ages inference actually saw.
  std::vector<std::pair<uint64_t, uint64_t>> seen{{m->id, m->age}};
  for (const auto& d : k->deps) seen.emplace_back(d.method_id, d.age);
  std::sort(seen.begin(), seen.end());
  uint64_t fp = mix64(seen.size());
  for (auto [id, age] : seen) fp = hash_combine(hash_combine(fp, id), age);
  std::unique_lock lock(cache_mutex_);
  cache_[KernelCacheKey{m->id, arg_types, fp, id_}] = k;
  deps_[Partial{m->id, arg_types}] = k->deps;
  return k;
}

CacheStats DeviceContext::stats() const { return stats_; }

size_t DeviceContext::cached_kernels() const {
  std::shared_lock lock(cache_mutex_);
  return cache_.size();
}

Type DeviceContext::arg_type(const KernelArg& arg) const {
  if (const auto* h = std::get_if<ArrayHandle>(&arg)) {
    region(*h);
    return h->device_type();
  }
  const Value& v = std::get<Value>(arg);
  if (auto h = as_handle(v)) return arg_type(*h);
  if (v.type.is_array()) {
    throw Error(ErrorKind::kUsage,
                "host arrays cannot be passed to kernels; upload them first");
  }
  return v.type;
}

void DeviceContext::write_arg(const KernelArg& arg, uint8_t* dst) const {
  const ArrayHandle* h = std::get_if<ArrayHandle>(&arg);
  std::optional<ArrayHandle> wrapped;
  if (!h) {
    wrapped = as_handle(std::get<Value>(arg));
    if (wrapped) h = &*wrapped;
  }
  if (h) {
    const Region& r = region(*h);
    std::memcpy(dst + kDescriptorBaseOffset, &r.offset, 8);
    std::memcpy(dst + kDescriptorLengthOffset, &r.length, 8);
    return;
  }
  store_value(std::get<Value>(arg), dst);
}

vm::ExecutionReport DeviceContext::launch(const MethodTable& table,
                                          std::string_view name,
                                          const std::vector<KernelArg>& args,
                                          const vm::LaunchConfig& config) {
  std::vector<Type> types;
  for (const KernelArg& a : args) types.push_back(arg_type(a));
  auto k = kernel(table, name, types);
  if (k->params.size() != args.size()) {
    throw Error(ErrorKind::kUsage,
                fmt::format("kernel {} takes {} arguments, got {}", name,
                            k->params.size(), args.size()));
  }
  ScratchRegions scratch(state_);
  std::vector<uint8_t> params(k->param_bytes);
  for (const device::ParamSlot& slot : k->params) {
    const KernelArg& arg = args[slot.source_arg];
    uint64_t size = slot.type.size_bytes();
    if (slot.kind == device::ParamSlot::Kind::kByReference) {
      std::vector<uint8_t> image(size);
      write_arg(arg, image.data());
      uint64_t copy = scratch.allocate(size);
      state_.write(copy, image);
      uint64_t ptr = vm::window_base(AddressSpace::kGlobal) + copy;
      std::memcpy(params.data() + slot.offset, &ptr, 8);
    } else {
      if (slot.offset + size > params.size()) {
        throw Error(ErrorKind::kUsage,
                    fmt::format("argument {} does not fit its param slot",
                                slot.source_arg + 1));
      }
      write_arg(arg, params.data() + slot.offset);
    }
  }
  vm::ExecutionReport report = vm::launch(state_, *k, config, params);
  stats_.launches++;
  return report;
}

DeviceContext& default_context() {
  static DeviceContext ctx;
  return ctx;
}

vm::ExecutionReport cuda_launch(DeviceContext& ctx, const MethodTable& table,
                                std::string_view name,
                                const std::vector<KernelArg>& args,
                                const vm::LaunchConfig& config) {
  return ctx.launch(table, name, args, config);
}

// ------------------------------------------------------------ array files

void write_array_file(const std::filesystem::path& path, const Value& host_array) {
  if (!host_array.array) {
    throw Error(ErrorKind::kUsage, "only arrays can be written to array files");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::kUsage,
                fmt::format("cannot write {}", path.string()));
  }
  auto n = static_cast<uint64_t>(host_array.array->length);
  out.write(reinterpret_cast<const char*>(&n), 8);
  const auto& bytes = host_array.array->bytes;
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Value read_array_file(const std::filesystem::path& path, Type element) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::kUsage, fmt::format("cannot read {}", path.string()));
  }
  uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), 8)) {
    throw Error(ErrorKind::kUsage,
                fmt::format("{}: missing 8-byte length header", path.string()));
  }
  uint64_t bytes = n * element.size_bytes();
  std::error_code ec;
  uint64_t file_size = std::filesystem::file_size(path, ec);
  if (ec || file_size != 8 + bytes) {
    throw Error(ErrorKind::kUsage,
                fmt::format("{}: header says {} {} elements ({} bytes) but the "
                            "file has {} bytes of data",
                            path.string(), n, element.str(), bytes,
                            ec ? 0 : file_size - 8));
  }
  Value v = Value::new_array(element, static_cast<int64_t>(n));
  in.read(reinterpret_cast<char*>(v.array->bytes.data()),
          static_cast<std::streamsize>(bytes));
  return v;
}

}  // namespace kf::runtime
