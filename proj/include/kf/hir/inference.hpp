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

#ifndef KF_HIR_INFERENCE_HPP_
#define KF_HIR_INFERENCE_HPP_

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <tuple>
#include <vector>

#include "kf/hir/hir.hpp"

namespace kf::hir {

struct InferenceParams {
  bool allow_any = true;
  int max_inline_depth = 8;  // read by the codegen inliner
  bool specialization_cache_enabled = true;
};

struct InferenceHooks {
  // Consulted before the method table. Must return a method applicable to
  // the given types, or nullptr to fall through.
  std::function<MethodPtr(std::string_view name, const std::vector<Type>& types)>
      resolve_call;
  // Result type of a target intrinsic, or nullopt if `name` is not one.
  std::function<std::optional<Type>(std::string_view name,
                                    const std::vector<Type>& types)>
      resolve_intrinsic;
  // Global names the target makes visible (stdlib functions, intrinsics).
  std::function<bool(std::string_view name)> knows_name;
  std::function<void(const HirFunction& fn, const Slot& slot)> on_unstable;
};

// Lowers a method body to untyped HIR for the given argument types.
HirFunction lower_ast(MethodPtr method, const std::vector<Type>& arg_types,
                      const MethodTable& table,
                      const InferenceHooks& hooks = {});

class Specializer;

// Runs inference to a fixpoint. Callees are specialized through `spec`.
void infer(HirFunction& fn, Specializer& spec);
void infer(HirFunction& fn, const InferenceParams& params,
           const InferenceHooks& hooks, const MethodTable& table);

// Memoized dispatch + lower_ast + infer keyed on (method, age, types).
// Entries are revalidated by re-resolving their recorded dependencies.
class Specializer {
 public:
  Specializer(const MethodTable& table, InferenceParams params = {},
              InferenceHooks hooks = {});

  std::shared_ptr<const HirFunction> specialize(std::string_view name,
                                                const std::vector<Type>& types,
                                                SourceSpan span = {});
  std::shared_ptr<const HirFunction> specialize_method(
      MethodPtr method, const std::vector<Type>& types, SourceSpan span = {});

  // Method a call resolves to under this specializer's hooks, or nullptr.
  MethodPtr resolve_method(std::string_view name,
                           const std::vector<Type>& types,
                           SourceSpan span = {}) const;
  // True if every dependency still resolves to the recorded definition.
  bool deps_current(const std::vector<Dependency>& deps) const;

  const MethodTable& table() const { return table_; }
  const InferenceParams& params() const { return params_; }
  const InferenceHooks& hooks() const { return hooks_; }
  size_t cache_size() const { return memo_.size(); }
  void clear() { memo_.clear(); }

 private:
  friend void infer(HirFunction& fn, Specializer& spec);
  using Key = std::tuple<uint64_t, uint64_t, std::vector<Type>>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const;
  };

  const MethodTable& table_;
  InferenceParams params_;
  InferenceHooks hooks_;
  std::map<Key, std::shared_ptr<const HirFunction>, KeyLess> memo_;
  std::vector<Key> in_progress_;
};

}  // namespace kf::hir

#endif  // KF_HIR_INFERENCE_HPP_
