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

#ifndef KF_TESTS_LIR_LIR_HELPERS_HPP_
#define KF_TESTS_LIR_LIR_HELPERS_HPP_

#include <string>
#include <vector>

#include "kf/hir/inference.hpp"
#include "kf/lir/codegen.hpp"
#include "kf/lir/passes.hpp"

namespace kf::lir::testing {

inline Module compile(MethodTable& table, std::string_view source,
                      std::string_view name, const std::vector<Type>& types,
                      const CodegenParams& params = {}) {
  table.load_source(source);
  hir::Specializer spec(table);
  auto fn = spec.specialize(name, types);
  return lower_hir(*fn, params);
}

inline Param param(std::string name, LirType type) {
  Param p;
  p.name = std::move(name);
  p.type = type;
  return p;
}

inline size_t count_in(const Module& m, Op op) {
  size_t n = 0;
  for (const Function& f : m.functions) n += count_ops(f, op);
  return n;
}

inline size_t count_mem(const Function& fn, Op op, AddressSpace space) {
  size_t n = 0;
  for (const Block& b : fn.blocks) {
    for (const Instr& in : b.instrs) n += in.op == op && in.space == space;
  }
  return n;
}

inline Type f32_global_array() {
  return Type::device_array(Type::float32(), AddressSpace::kGlobal);
}

}  // namespace kf::lir::testing

#endif  // KF_TESTS_LIR_LIR_HELPERS_HPP_
