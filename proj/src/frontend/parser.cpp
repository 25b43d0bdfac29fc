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

#include "kf/frontend/parser.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <vector>

namespace kf {

namespace {

enum class Tok : uint8_t { kIdent, kInt, kFloat, kOp, kNewline, kEof };

struct Token {
  Tok kind = Tok::kEof;
  std::string text;
  SourceSpan span;
  int64_t int_value = 0;
  double float_value = 0;
  bool is_f32 = false;
};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    int depth = 0;
    while (true) {
      skip_space();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      SourceSpan span{line_, col_};
      if (c == '\n') {
        advance();
        if (depth == 0) out.push_back({Tok::kNewline, "\n", span});
        continue;
      }
      if (is_ident_start(c)) {
        size_t start = pos_;
        while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
        out.push_back({Tok::kIdent, std::string(src_.substr(start, pos_ - start)),
                       span});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(number(span));
        continue;
      }
      static constexpr std::string_view kTwo[] = {
          "==", "!=", "<=", ">=", "&&", "||", ".+", ".-", ".*", "./", ".^"};
      std::string_view rest = src_.substr(pos_);
      bool matched = false;
      for (std::string_view op : kTwo) {
        if (rest.substr(0, 2) == op) {
          advance();
          advance();
          out.push_back({Tok::kOp, std::string(op), span});
          matched = true;
          break;
        }
      }
      if (matched) continue;
      static constexpr std::string_view kOne = "+-*/%^<>=!(),[]{}:.;";
      if (kOne.find(c) == std::string_view::npos) {
        throw Error(ErrorKind::kSyntax,
                    fmt::format("unexpected character '{}'", c), span);
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if ((c == ')' || c == ']' || c == '}') && depth > 0) --depth;
      advance();
      out.push_back({Tok::kOp, std::string(1, c), span});
    }
    out.push_back({Tok::kEof, "", SourceSpan{line_, col_}});
    return out;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token number(SourceSpan span) {
    size_t start = pos_;
    bool is_float = false;
    bool is_f32 = false;
    auto digits = [&] {
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
      }
    };
    digits();
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' &&
        std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      is_float = true;
      advance();
      digits();
    }
    std::string text(src_.substr(start, pos_ - start));
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'f')) {
      size_t save = pos_;
      uint32_t save_col = col_;
      bool f32 = src_[pos_] == 'f';
      advance();
      std::string exp = "e";
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) {
        exp += src_[pos_];
        advance();
      }
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        size_t es = pos_;
        digits();
        exp += src_.substr(es, pos_ - es);
        text += exp;
        is_float = true;
        is_f32 = f32;
      } else {
        pos_ = save;
        col_ = save_col;
      }
    }
    if (pos_ < src_.size() && is_ident_start(src_[pos_])) {
      throw Error(ErrorKind::kSyntax,
                  fmt::format("malformed number literal near '{}'", text),
                  span);
    }
    Token t;
    t.span = span;
    t.text = text;
    if (is_float) {
      t.kind = Tok::kFloat;
      t.float_value = std::strtod(text.c_str(), nullptr);
      t.is_f32 = is_f32;
      if (is_f32) t.float_value = static_cast<float>(t.float_value);
    } else {
      t.kind = Tok::kInt;
      auto res = std::from_chars(text.data(), text.data() + text.size(),
                                 t.int_value);
      if (res.ec != std::errc()) {
        throw Error(ErrorKind::kSyntax,
                    fmt::format("integer literal {} out of range", text), span);
      }
    }
    return t;
  }

  std::string_view src_;
  size_t pos_ = 0;
  uint32_t line_ = 1;
  uint32_t col_ = 1;
};

bool is_keyword(std::string_view s) {
  static constexpr std::string_view kKeywords[] = {
      "function", "end", "if", "elseif", "else", "while", "return",
      "record", "mutable", "true", "false", "nothing"};
  for (auto k : kKeywords) {
    if (s == k) return true;
  }
  return false;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ast::Program program() {
    ast::Program prog;
    skip_separators();
    while (!at_eof()) {
      if (peek_ident("function")) {
        prog.items.emplace_back(
            std::make_shared<const ast::FunctionDef>(function_def()));
      } else if (peek_ident("record") || peek_ident("mutable")) {
        prog.items.emplace_back(record_def());
      } else {
        fail("expected 'function' or 'record' at top level");
      }
      skip_separators();
    }
    return prog;
  }

  ast::ExprPtr lone_expression() {
    skip_newlines();
    auto e = expr();
    skip_separators();
    if (!at_eof()) fail("unexpected trailing input");
    return e;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  bool at_eof() const { return peek().kind == Tok::kEof; }
  bool peek_op(std::string_view op, size_t ahead = 0) const {
    return peek(ahead).kind == Tok::kOp && peek(ahead).text == op;
  }
  bool peek_ident(std::string_view word) const {
    return peek().kind == Tok::kIdent && peek().text == word;
  }
  Token next() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(std::string_view what) const {
    const Token& t = peek();
    std::string found = t.kind == Tok::kEof       ? "end of input"
                        : t.kind == Tok::kNewline ? "newline"
                                                  : fmt::format("'{}'", t.text);
    throw Error(ErrorKind::kSyntax, fmt::format("{}, found {}", what, found),
                t.span);
  }

  void expect_op(std::string_view op) {
    if (!peek_op(op)) fail(fmt::format("expected '{}'", op));
    next();
  }
  void expect_word(std::string_view word) {
    if (!peek_ident(word)) fail(fmt::format("expected '{}'", word));
    next();
  }
  std::string expect_name(std::string_view what) {
    if (peek().kind != Tok::kIdent || is_keyword(peek().text)) {
      fail(fmt::format("expected {}", what));
    }
    return next().text;
  }

  void skip_newlines() {
    while (peek().kind == Tok::kNewline) next();
  }
  void skip_separators() {
    while (peek().kind == Tok::kNewline || peek_op(";")) next();
  }

  ast::TypeExpr type_expr() {
    ast::TypeExpr t;
    t.span = peek().span;
    t.name = expect_name("type name");
    if (peek_op("{")) {
      next();
      if (peek_op("}")) fail("expected type parameter");
      t.params.push_back(type_expr());
      while (peek_op(",")) {
        next();
        t.params.push_back(type_expr());
      }
      expect_op("}");
    }
    return t;
  }

  ast::FunctionDef function_def() {
    ast::FunctionDef fn;
    fn.span = peek().span;
    expect_word("function");
    const Token& t = peek();
    if (t.kind == Tok::kIdent && !is_keyword(t.text)) {
      fn.name = next().text;
    } else if (t.kind == Tok::kOp &&
               (t.text == "+" || t.text == "-" || t.text == "*" ||
                t.text == "/" || t.text == "%" || t.text == "^" ||
                t.text == "==" || t.text == "!=" || t.text == "<" ||
                t.text == "<=" || t.text == ">" || t.text == ">=")) {
      fn.name = next().text;
    } else {
      fail("expected function name");
    }
    expect_op("(");
    if (!peek_op(")")) {
      fn.params.push_back(param());
      while (peek_op(",")) {
        next();
        fn.params.push_back(param());
      }
    }
    expect_op(")");
    fn.body = block();
    expect_word("end");
    return fn;
  }

  ast::ParamDecl param() {
    ast::ParamDecl p;
    p.span = peek().span;
    p.name = expect_name("parameter name");
    if (peek_op(":")) {
      next();
      p.type = type_expr();
    }
    return p;
  }

  ast::RecordDef record_def() {
    ast::RecordDef rec;
    rec.span = peek().span;
    if (peek_ident("mutable")) {
      next();
      rec.is_mutable = true;
    }
    expect_word("record");
    rec.name = expect_name("record name");
    skip_separators();
    while (!peek_ident("end")) {
      if (at_eof()) fail("expected 'end' to close record");
      rec.fields.push_back(expect_name("field name"));
      std::optional<ast::TypeExpr> ty;
      if (peek_op(":")) {
        next();
        ty = type_expr();
      }
      rec.field_types.push_back(std::move(ty));
      if (peek_op(",")) next();
      skip_separators();
    }
    expect_word("end");
    return rec;
  }

  bool at_block_end() const {
    return at_eof() || peek_ident("end") || peek_ident("else") ||
           peek_ident("elseif");
  }

  std::vector<ast::Stmt> block() {
    std::vector<ast::Stmt> body;
    skip_separators();
    while (!at_block_end()) {
      body.push_back(statement());
      skip_separators();
    }
    return body;
  }

  ast::Stmt statement() {
    ast::Stmt s;
    s.span = peek().span;
    if (peek_ident("if")) {
      next();
      return if_tail(s.span);
    }
    if (peek_ident("while")) {
      next();
      s.kind = ast::StmtKind::kWhile;
      s.cond = expr();
      s.body = block();
      expect_word("end");
      return s;
    }
    if (peek_ident("return")) {
      next();
      s.kind = ast::StmtKind::kReturn;
      if (!(peek().kind == Tok::kNewline || peek_op(";") || at_block_end())) {
        s.value = expr();
      }
      return s;
    }
    if (peek().kind == Tok::kIdent && is_keyword(peek().text) &&
        peek().text != "true" && peek().text != "false" &&
        peek().text != "nothing") {
      fail("unexpected keyword");
    }
    auto e = expr();
    if (peek_op("=")) {
      next();
      skip_newlines();
      if (e->kind != ast::ExprKind::kVar && e->kind != ast::ExprKind::kIndex &&
          e->kind != ast::ExprKind::kField) {
        throw Error(ErrorKind::kSyntax, "invalid assignment target", e->span);
      }
      s.kind = ast::StmtKind::kAssign;
      s.target = std::move(e);
      s.value = expr();
      return s;
    }
    s.kind = ast::StmtKind::kExpr;
    s.value = std::move(e);
    return s;
  }

  ast::Stmt if_tail(SourceSpan span) {
    ast::Stmt s;
    s.kind = ast::StmtKind::kIf;
    s.span = span;
    s.cond = expr();
    s.body = block();
    if (peek_ident("elseif")) {
      SourceSpan inner = peek().span;
      next();
      s.else_body.push_back(if_tail(inner));
      return s;
    }
    if (peek_ident("else")) {
      next();
      s.else_body = block();
    }
    expect_word("end");
    return s;
  }

  ast::ExprPtr make(ast::ExprKind kind, SourceSpan span) {
    auto e = std::make_unique<ast::Expr>();
    e->kind = kind;
    e->span = span;
    return e;
  }

  ast::ExprPtr binary(ast::BinaryOp op, ast::ExprPtr l, ast::ExprPtr r,
                      bool dotted) {
    auto e = make(dotted ? ast::ExprKind::kDotBinary : ast::ExprKind::kBinary,
                  l->span);
    e->binary_op = op;
    e->args.push_back(std::move(l));
    e->args.push_back(std::move(r));
    return e;
  }

  ast::ExprPtr expr() { return or_expr(); }

  ast::ExprPtr or_expr() {
    auto l = and_expr();
    while (peek_op("||")) {
      next();
      skip_newlines();
      l = binary(ast::BinaryOp::kOr, std::move(l), and_expr(), false);
    }
    return l;
  }

  ast::ExprPtr and_expr() {
    auto l = cmp_expr();
    while (peek_op("&&")) {
      next();
      skip_newlines();
      l = binary(ast::BinaryOp::kAnd, std::move(l), cmp_expr(), false);
    }
    return l;
  }

  ast::ExprPtr cmp_expr() {
    auto l = add_expr();
    static constexpr std::pair<std::string_view, ast::BinaryOp> kOps[] = {
        {"==", ast::BinaryOp::kEq}, {"!=", ast::BinaryOp::kNe},
        {"<=", ast::BinaryOp::kLe}, {">=", ast::BinaryOp::kGe},
        {"<", ast::BinaryOp::kLt},  {">", ast::BinaryOp::kGt}};
    for (auto [tok, op] : kOps) {
      if (peek_op(tok)) {
        next();
        skip_newlines();
        auto r = add_expr();
        for (auto [tok2, unused] : kOps) {
          if (peek_op(tok2)) fail("chained comparisons are not supported");
        }
        return binary(op, std::move(l), std::move(r), false);
      }
    }
    return l;
  }

  ast::ExprPtr add_expr() {
    auto l = mul_expr();
    while (true) {
      ast::BinaryOp op;
      bool dotted = false;
      if (peek_op("+")) {
        op = ast::BinaryOp::kAdd;
      } else if (peek_op("-")) {
        op = ast::BinaryOp::kSub;
      } else if (peek_op(".+")) {
        op = ast::BinaryOp::kAdd;
        dotted = true;
      } else if (peek_op(".-")) {
        op = ast::BinaryOp::kSub;
        dotted = true;
      } else {
        return l;
      }
      next();
      skip_newlines();
      l = binary(op, std::move(l), mul_expr(), dotted);
    }
  }

  ast::ExprPtr mul_expr() {
    auto l = unary_expr();
    while (true) {
      ast::BinaryOp op;
      bool dotted = false;
      if (peek_op("*")) {
        op = ast::BinaryOp::kMul;
      } else if (peek_op("/")) {
        op = ast::BinaryOp::kDiv;
      } else if (peek_op("%")) {
        op = ast::BinaryOp::kRem;
      } else if (peek_op(".*")) {
        op = ast::BinaryOp::kMul;
        dotted = true;
      } else if (peek_op("./")) {
        op = ast::BinaryOp::kDiv;
        dotted = true;
      } else {
        return l;
      }
      next();
      skip_newlines();
      l = binary(op, std::move(l), unary_expr(), dotted);
    }
  }

  ast::ExprPtr unary_expr() {
    if (peek_op("-") || peek_op("!")) {
      Token t = next();
      auto e = make(ast::ExprKind::kUnary, t.span);
      e->unary_op = t.text == "-" ? ast::UnaryOp::kNeg : ast::UnaryOp::kNot;
      e->args.push_back(unary_expr());
      return e;
    }
    return power_expr();
  }

  ast::ExprPtr power_expr() {
    auto base = postfix_expr();
    if (peek_op("^") || peek_op(".^")) {
      bool dotted = next().text == ".^";
      skip_newlines();
      return binary(ast::BinaryOp::kPow, std::move(base), unary_expr(), dotted);
    }
    return base;
  }

  std::vector<ast::ExprPtr> call_args() {
    std::vector<ast::ExprPtr> args;
    expect_op("(");
    if (!peek_op(")")) {
      args.push_back(expr());
      while (peek_op(",")) {
        next();
        args.push_back(expr());
      }
    }
    expect_op(")");
    return args;
  }

  ast::ExprPtr postfix_expr() {
    auto e = primary();
    while (true) {
      if (peek_op("(")) {
        if (e->kind != ast::ExprKind::kVar) fail("only named functions can be called");
        auto call = make(ast::ExprKind::kCall, e->span);
        call->name = e->name;
        call->args = call_args();
        e = std::move(call);
      } else if (peek_op("[")) {
        next();
        auto idx = make(ast::ExprKind::kIndex, e->span);
        idx->args.push_back(std::move(e));
        idx->args.push_back(expr());
        expect_op("]");
        e = std::move(idx);
      } else if (peek_op(".") && peek_op("(", 1)) {
        if (e->kind != ast::ExprKind::kVar) fail("only named functions can be broadcast");
        next();
        auto call = make(ast::ExprKind::kDotCall, e->span);
        call->name = e->name;
        call->args = call_args();
        e = std::move(call);
      } else if (peek_op(".")) {
        next();
        auto field = make(ast::ExprKind::kField, e->span);
        field->name = expect_name("field name");
        field->args.push_back(std::move(e));
        e = std::move(field);
      } else {
        return e;
      }
    }
  }

  ast::ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kInt: {
        auto e = make(ast::ExprKind::kIntLit, t.span);
        e->int_value = t.int_value;
        e->literal_kind = ScalarKind::kInt64;
        next();
        return e;
      }
      case Tok::kFloat: {
        auto e = make(ast::ExprKind::kFloatLit, t.span);
        e->float_value = t.float_value;
        e->literal_kind = t.is_f32 ? ScalarKind::kFloat32 : ScalarKind::kFloat64;
        next();
        return e;
      }
      case Tok::kIdent: {
        if (t.text == "true" || t.text == "false") {
          auto e = make(ast::ExprKind::kBoolLit, t.span);
          e->bool_value = t.text == "true";
          e->literal_kind = ScalarKind::kBool;
          next();
          return e;
        }
        if (t.text == "nothing") {
          auto e = make(ast::ExprKind::kNothingLit, t.span);
          next();
          return e;
        }
        if (is_keyword(t.text)) fail("expected expression");
        auto e = make(ast::ExprKind::kVar, t.span);
        e->name = t.text;
        next();
        return e;
      }
      case Tok::kOp:
        if (t.text == "(") {
          next();
          skip_newlines();
          auto e = expr();
          skip_newlines();
          expect_op(")");
          return e;
        }
        break;
      default:
        break;
    }
    fail("expected expression");
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

ast::Program parse(std::string_view source) {
  Parser p(Lexer(source).run());
  return p.program();
}

ast::ExprPtr parse_expression(std::string_view source) {
  Parser p(Lexer(source).run());
  return p.lone_expression();
}

}  // namespace kf
