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

#ifndef KF_SUPPORT_ERROR_HPP_
#define KF_SUPPORT_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kf {

struct SourceSpan {
  uint32_t line = 0;
  uint32_t column = 0;

  bool valid() const { return line != 0; }
  std::string str() const;
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ErrorKind {
  kSyntax,
  kDefinition,
  kNoMethod,
  kAmbiguity,
  kLowering,
  kInstability,
  kCodegen,
  kVerify,
  kUnsupported,
  kRuntime,
  kBounds,
  kDivide,
  kMemory,
  kHandle,
  kUsage,
};

std::string_view error_kind_name(ErrorKind kind);

// Single exception type for every stage; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceSpan span = {});

  ErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }
  const std::string& message() const { return message_; }

  // "line:col: kind: message", or "kind: message" without a span.
  std::string diagnostic(std::string_view file = {}) const;

 private:
  ErrorKind kind_;
  SourceSpan span_;
  std::string message_;
};

}  // namespace kf

#endif  // KF_SUPPORT_ERROR_HPP_
