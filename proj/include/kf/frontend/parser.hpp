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

#ifndef KF_FRONTEND_PARSER_HPP_
#define KF_FRONTEND_PARSER_HPP_

#include <string_view>

#include "kf/frontend/ast.hpp"

namespace kf {

// Parses a whole KSL compilation unit. Throws Error(kSyntax) with the
// line and column of the first offending token.
ast::Program parse(std::string_view source);

// Parses a single expression (used by tooling and tests).
ast::ExprPtr parse_expression(std::string_view source);

}  // namespace kf

#endif  // KF_FRONTEND_PARSER_HPP_
