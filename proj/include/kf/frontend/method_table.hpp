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

#ifndef KF_FRONTEND_METHOD_TABLE_HPP_
#define KF_FRONTEND_METHOD_TABLE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kf/frontend/ast.hpp"
#include "kf/frontend/types.hpp"

namespace kf {

// A parameter annotation as written in source.
struct ParamConstraint {
  enum class Kind : uint8_t {
    kNone,     // unannotated
    kScalar,   // Int64, Float32, ...
    kRecord,   // any instantiation of a record
    kArray,    // host or device array of any element type
    kArrayOf,  // array whose element is a scalar or record instantiation
  };

  Kind kind = Kind::kNone;
  ScalarKind scalar = ScalarKind::kBool;
  std::shared_ptr<const RecordDecl> record;
  // kArrayOf element: a scalar (record == nullptr) or a record.
  bool constrained() const { return kind != Kind::kNone; }
  // Names a nominal type rather than a family (used to break ties).
  bool exact() const {
    return kind == Kind::kScalar || kind == Kind::kRecord ||
           kind == Kind::kArrayOf;
  }
  bool matches(Type t) const;
  std::string str() const;
  friend bool operator==(const ParamConstraint& a, const ParamConstraint& b) {
    return a.kind == b.kind && a.scalar == b.scalar && a.record == b.record;
  }
};

struct Method {
  uint64_t id = 0;  // stable across redefinitions with the same signature
  std::string name;
  std::vector<std::string> param_names;
  std::vector<ParamConstraint> constraints;
  std::shared_ptr<const ast::FunctionDef> def;
  uint64_t age = 0;
  std::shared_ptr<const RecordScope> records;
  bool inline_always = false;

  size_t arity() const { return param_names.size(); }
  bool applicable(const std::vector<Type>& types) const;
  // (constraint count, exact constraint count); larger is more specific.
  std::pair<int, int> specificity() const;
  std::string signature() const;  // "intersect(a: Rect, b: Line)"
};

using MethodPtr = std::shared_ptr<const Method>;

class MethodTable {
 public:
  MethodTable();

  // Declares records first, then defines functions in source order.
  std::vector<MethodPtr> load(const ast::Program& program);
  std::vector<MethodPtr> load_source(std::string_view source);

  MethodPtr define(std::shared_ptr<const ast::FunctionDef> def,
                   bool inline_always = false);
  std::shared_ptr<const RecordDecl> define_record(const ast::RecordDef& def);

  // Most specific applicable method, or nullptr when none applies.
  // Throws kAmbiguity when the best candidates tie.
  MethodPtr find(std::string_view name, const std::vector<Type>& types,
                 SourceSpan span = {}) const;
  // As find, but throws kNoMethod when nothing applies.
  MethodPtr dispatch(std::string_view name, const std::vector<Type>& types,
                     SourceSpan span = {}) const;

  bool has_function(std::string_view name) const;
  const std::vector<MethodPtr>& methods(std::string_view name) const;
  std::vector<MethodPtr> all_methods() const;
  // Current definition for a method id, or nullptr after it disappeared.
  MethodPtr by_id(uint64_t id) const;

  uint64_t world_age() const { return world_age_; }
  const RecordScope& records() const { return *records_; }
  std::shared_ptr<const RecordScope> records_ptr() const { return records_; }

 private:
  ParamConstraint resolve_constraint(const ast::TypeExpr& t) const;

  uint64_t world_age_ = 0;
  std::shared_ptr<RecordScope> records_;
  std::map<std::string, std::vector<MethodPtr>, std::less<>> methods_;
  std::map<uint64_t, MethodPtr> by_id_;
};

}  // namespace kf

#endif  // KF_FRONTEND_METHOD_TABLE_HPP_
