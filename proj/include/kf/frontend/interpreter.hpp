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

#ifndef KF_FRONTEND_INTERPRETER_HPP_
#define KF_FRONTEND_INTERPRETER_HPP_

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "kf/frontend/method_table.hpp"
#include "kf/frontend/value.hpp"

namespace kf {

struct InterpreterOptions {
  // Consulted before the main table; a target can supply its own stdlib.
  const MethodTable* overlay = nullptr;
  // Resolves names the tables do not define (intrinsics, host objects).
  // Returns nullopt to fall through to the core builtins.
  std::function<std::optional<Value>(std::string_view name,
                                     const std::vector<Value>& args,
                                     SourceSpan span)>
      builtin_hook;
  // Statements executed before giving up; 0 means unlimited.
  uint64_t step_limit = 0;
};

// Sequential big-step evaluator over the AST. Arguments are evaluated left
// to right; `&&` and `||` short-circuit.
class Interpreter {
 public:
  explicit Interpreter(const MethodTable& table,
                       InterpreterOptions options = {});

  Value call(std::string_view name, const std::vector<Value>& args,
             SourceSpan span = {});
  uint64_t steps() const { return steps_; }

 private:
  struct Frame;
  enum class Flow : uint8_t { kNormal, kReturn };

  Value invoke(const Method& m, const std::vector<Value>& args);
  Flow exec_block(const std::vector<ast::Stmt>& body, Frame& f);
  Flow exec(const ast::Stmt& s, Frame& f);
  Value eval(const ast::Expr& e, Frame& f);
  Value eval_call(const ast::Expr& e, Frame& f);
  Value broadcast(const ast::Expr& e, Frame& f);
  Value resolve_and_call(std::string_view name, const std::vector<Value>& args,
                         SourceSpan span, const Frame* f);
  std::shared_ptr<const RecordDecl> find_record(std::string_view name,
                                                const Frame* f) const;
  bool names_function(std::string_view name, const Frame* f) const;
  void assign(const ast::Expr& target, Value v, Frame& f);
  void tick(SourceSpan span);

  const MethodTable& table_;
  InterpreterOptions options_;
  uint64_t steps_ = 0;
  int depth_ = 0;
};

Value interpret_reference(const MethodTable& table, std::string_view entry,
                          const std::vector<Value>& args,
                          InterpreterOptions options = {});

}  // namespace kf

#endif  // KF_FRONTEND_INTERPRETER_HPP_
