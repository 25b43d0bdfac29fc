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

#ifndef KF_HIR_HIR_HPP_
#define KF_HIR_HIR_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kf/frontend/ast.hpp"
#include "kf/frontend/builtins.hpp"
#include "kf/frontend/method_table.hpp"
#include "kf/frontend/value.hpp"

namespace kf::hir {

// Element of the inference lattice: Bottom < Concrete(T) < Any.
class LatticeType {
 public:
  enum class Kind : uint8_t { kBottom, kConcrete, kAny };

  LatticeType() = default;
  static LatticeType bottom() { return {}; }
  static LatticeType any() { return LatticeType(Kind::kAny, Type()); }
  static LatticeType of(Type t) { return LatticeType(Kind::kConcrete, t); }

  Kind kind() const { return kind_; }
  bool is_bottom() const { return kind_ == Kind::kBottom; }
  bool is_any() const { return kind_ == Kind::kAny; }
  bool is_concrete() const { return kind_ == Kind::kConcrete; }
  Type type() const { return type_; }  // only for concrete

  LatticeType join(const LatticeType& other) const;
  bool leq(const LatticeType& other) const;
  std::string str() const;

  friend bool operator==(const LatticeType& a, const LatticeType& b) {
    return a.kind_ == b.kind_ && (a.kind_ != Kind::kConcrete || a.type_ == b.type_);
  }

 private:
  LatticeType(Kind k, Type t) : kind_(k), type_(t) {}
  Kind kind_ = Kind::kBottom;
  Type type_;
};

using SlotId = uint32_t;

enum class SlotKind : uint8_t { kParam, kLocal, kTemp };

struct Slot {
  SlotKind kind = SlotKind::kTemp;
  std::string name;  // source name for params and locals
  LatticeType type;
  // Distinct concrete types that reached this slot, for diagnostics.
  std::vector<Type> observed;
  SourceSpan span;

  std::string ref(SlotId id) const;  // "%x" or "%7"
};

struct HirFunction;

enum class CallKind : uint8_t {
  kUnresolved,
  kBuiltin,
  kMethod,
  kIntrinsic,
  kRecordCtor,
  kDynamic,  // an argument is Any; resolution deferred to run time
};

struct CallTarget {
  CallKind kind = CallKind::kUnresolved;
  std::string name;  // resolved callee name
  builtins::Builtin builtin = builtins::Builtin::kConvert;
  MethodPtr method;
  std::shared_ptr<const HirFunction> callee;
  Type record;  // kRecordCtor
};

enum class RhsKind : uint8_t {
  kConst,   // constant (scalar, nothing or symbol)
  kCopy,    // args[0]
  kUnary,   // op args[0]
  kBinary,  // args[0] op args[1]
  kCall,    // name(args...)
  kIndex,   // args[0][args[1]]
  kField,   // args[0].name
};

struct Rhs {
  RhsKind kind = RhsKind::kConst;
  Value constant;
  std::vector<SlotId> args;
  ast::UnaryOp unary_op = ast::UnaryOp::kNeg;
  ast::BinaryOp binary_op = ast::BinaryOp::kAdd;
  std::string name;
  // kCall: the callee is the function value held in this slot.
  std::optional<SlotId> callee_slot;
  // kCall, and kUnary/kBinary on non-primitive operands (operator methods).
  CallTarget target;
};

enum class StmtKind : uint8_t {
  kAssign,      // dst = rhs
  kStoreIndex,  // base[index] = value
  kStoreField,  // base.field = value
  kIf,
  kWhile,  // loop { cond_body; if !cond break; body }
  kReturn,
};

struct Stmt {
  StmtKind kind = StmtKind::kAssign;
  SourceSpan span;
  SlotId dst = 0;
  Rhs rhs;
  SlotId base = 0;
  SlotId index = 0;
  SlotId value = 0;
  std::string field;
  SlotId cond = 0;
  std::vector<Stmt> cond_body;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  std::optional<SlotId> ret;
};

// A call resolved during inference, with the definition it resolved to.
// method_id 0 means the name resolved to something other than a method.
struct Dependency {
  std::string name;
  std::vector<Type> arg_types;
  uint64_t method_id = 0;
  uint64_t age = 0;

  friend bool operator==(const Dependency&, const Dependency&) = default;
};

struct HirFunction {
  MethodPtr method;
  std::string name;
  std::vector<Type> arg_types;
  std::vector<Slot> slots;
  std::vector<SlotId> params;
  std::vector<Stmt> body;
  LatticeType return_type;
  bool may_fall_through = true;
  bool inferred = false;
  // Every call resolved while inferring this body or any callee.
  std::vector<Dependency> deps;

  std::string signature() const;  // "f(Float64, Int64)"
  // Identifier-safe unique name: "f_Float64_Int64".
  std::string mangled_name() const;
  Type slot_type(SlotId id) const { return slots[id].type.type(); }
};

// Text dump: one statement per line as `%slot: Type = expr`.
std::string dump(const HirFunction& fn);

}  // namespace kf::hir

#endif  // KF_HIR_HIR_HPP_
