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

#include "kf/support/error.hpp"

#include <fmt/format.h>

#include "kf/support/instrumentation.hpp"

namespace kf {

std::string SourceSpan::str() const {
  return valid() ? fmt::format("{}:{}", line, column) : std::string("?");
}

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSyntax: return "syntax error";
    case ErrorKind::kDefinition: return "definition error";
    case ErrorKind::kNoMethod: return "no method";
    case ErrorKind::kAmbiguity: return "ambiguous dispatch";
    case ErrorKind::kLowering: return "lowering error";
    case ErrorKind::kInstability: return "type instability";
    case ErrorKind::kCodegen: return "codegen error";
    case ErrorKind::kVerify: return "verification failure";
    case ErrorKind::kUnsupported: return "unsupported construct";
    case ErrorKind::kRuntime: return "runtime error";
    case ErrorKind::kBounds: return "bounds error";
    case ErrorKind::kDivide: return "divide error";
    case ErrorKind::kMemory: return "memory error";
    case ErrorKind::kHandle: return "handle error";
    case ErrorKind::kUsage: return "usage error";
  }
  return "error";
}

Error::Error(ErrorKind kind, std::string message, SourceSpan span)
    : std::runtime_error(span.valid()
                             ? fmt::format("{}: {}: {}", span.str(),
                                           error_kind_name(kind), message)
                             : fmt::format("{}: {}", error_kind_name(kind),
                                           message)),
      kind_(kind),
      span_(span),
      message_(std::move(message)) {}

std::string Error::diagnostic(std::string_view file) const {
  if (file.empty()) return what();
  if (!span_.valid()) return fmt::format("{}: {}", file, what());
  return fmt::format("{}:{}", file, what());
}

CompilerCounters& compiler_counters() {
  static CompilerCounters counters;
  return counters;
}

CounterSnapshot CounterSnapshot::take() {
  auto& c = compiler_counters();
  return {c.inference_runs.load(), c.lowering_runs.load(),
          c.codegen_runs.load(), c.kernel_compiles.load()};
}

CounterSnapshot CounterSnapshot::operator-(const CounterSnapshot& o) const {
  return {inference_runs - o.inference_runs, lowering_runs - o.lowering_runs,
          codegen_runs - o.codegen_runs, kernel_compiles - o.kernel_compiles};
}

}  // namespace kf
