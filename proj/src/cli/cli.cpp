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

#include "kf/cli/cli.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kf/arrays/gpu_arrays.hpp"
#include "kf/device/target.hpp"
#include "kf/frontend/ast.hpp"
#include "kf/frontend/parser.hpp"
#include "kf/hir/hir.hpp"
#include "kf/lir/codegen.hpp"
#include "kf/lir/lir.hpp"
#include "kf/lir/passes.hpp"
#include "kf/runtime/runtime.hpp"
#include "kf/support/instrumentation.hpp"

namespace kf::cli {
namespace {

using nlohmann::json;
using runtime::ArrayHandle;
using runtime::DeviceContext;
using runtime::KernelArg;

const std::vector<std::string> kStages = {"ast", "hir", "lir", "lir-opt",
                                          "devlir"};

struct Options {
  std::string file;
  std::string target = "host";
  std::vector<std::string> dumps;
  std::string kernel;
  std::string grid = "1";
  std::string block = "1";
  uint64_t shmem = 0;
  std::vector<std::string> args;
  std::string cost_table;
  bool no_cache = false;
  uint64_t seed = 0;
  std::string profile_out;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRuntime:
    case ErrorKind::kBounds:
    case ErrorKind::kDivide:
    case ErrorKind::kMemory:
    case ErrorKind::kHandle:
      return kExitRuntime;
    case ErrorKind::kUsage:
      return kExitUsage;
    default:
      return kExitCompile;
  }
}

[[noreturn]] void usage(std::string msg) {
  throw Error(ErrorKind::kUsage, std::move(msg));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 53 random mantissa bits; the same sequence on every platform.
struct Rng {
  explicit Rng(uint64_t seed) : engine(seed) {}
  double uniform() { return static_cast<double>(engine() >> 11) * 0x1.0p-53; }
  int64_t below(int64_t n) { return static_cast<int64_t>(engine() % n); }
  std::mt19937_64 engine;
};

// ---- argument grammar -------------------------------------------------

std::vector<std::string> split_top(std::string_view s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '{' || c == '(') ++depth;
    if (c == '}' || c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<ScalarKind> short_scalar(std::string_view s) {
  if (s == "bool") return ScalarKind::kBool;
  if (s == "i32") return ScalarKind::kInt32;
  if (s == "i64") return ScalarKind::kInt64;
  if (s == "f32") return ScalarKind::kFloat32;
  if (s == "f64") return ScalarKind::kFloat64;
  return scalar_from_name(s);
}

// Host view: scalars, record instantiations, Array{T}.
Type parse_type(std::string_view s, const MethodTable& table) {
  if (s.size() > 2 && s.substr(s.size() - 2) == "[]") {
    return Type::array(parse_type(s.substr(0, s.size() - 2), table));
  }
  if (auto k = short_scalar(s)) return Type::scalar(*k);
  size_t brace = s.find('{');
  if (brace != std::string_view::npos && s.back() == '}') {
    std::string name(s.substr(0, brace));
    auto decl = table.records().find(name);
    if (!decl) usage(fmt::format("unknown record {} in --arg", name));
    std::vector<Type> fields;
    for (const std::string& f :
         split_top(s.substr(brace + 1, s.size() - brace - 2), ',')) {
      fields.push_back(parse_type(f, table));
    }
    return instantiate_record(decl, fields);
  }
  usage(fmt::format("bad type '{}' in --arg", s));
}

Value parse_scalar(ScalarKind kind, const std::string& text) {
  if (kind == ScalarKind::kBool) {
    if (text == "true" || text == "1") return Value::of_bool(true);
    if (text == "false" || text == "0") return Value::of_bool(false);
    usage(fmt::format("bad Bool literal '{}'", text));
  }
  if (is_integer(kind)) {
    int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) {
      usage(fmt::format("bad integer literal '{}'", text));
    }
    return kind == ScalarKind::kInt32 ? Value::of_i32(static_cast<int32_t>(v))
                                      : Value::of_i64(v);
  }
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) {
    usage(fmt::format("bad float literal '{}'", text));
  }
  return kind == ScalarKind::kFloat32 ? Value::of_f32(static_cast<float>(v))
                                      : Value::of_f64(v);
}

Value parse_value(Type t, const std::string& text) {
  if (t.is_scalar()) return parse_scalar(t.scalar_kind(), text);
  if (t.is_record()) {
    std::vector<std::string> parts = split_top(text, ',');
    if (parts.size() != t.fields().size()) {
      usage(fmt::format("{} needs {} fields, got {}", t.str(),
                        t.fields().size(), parts.size()));
    }
    std::vector<Value> fields;
    for (size_t i = 0; i < parts.size(); ++i) {
      fields.push_back(parse_value(t.fields()[i], parts[i]));
    }
    return Value::new_record(t, std::move(fields));
  }
  usage(fmt::format("cannot write a literal of type {}", t.str()));
}

Value random_element(Type t, Rng& rng) {
  if (!t.is_scalar()) usage(fmt::format("rand: needs a scalar element, not {}", t.str()));
  switch (t.scalar_kind()) {
    case ScalarKind::kBool: return Value::of_bool(rng.below(2) != 0);
    case ScalarKind::kInt32: return Value::of_i32(static_cast<int32_t>(rng.below(1000)));
    case ScalarKind::kInt64: return Value::of_i64(rng.below(1000));
    case ScalarKind::kFloat32: return Value::of_f32(static_cast<float>(rng.uniform()));
    case ScalarKind::kFloat64: return Value::of_f64(rng.uniform());
  }
  return {};
}

Value int_element(Type t, int64_t v) {
  if (!t.is_scalar() || t.is_bool()) {
    usage(fmt::format("range: needs a numeric element, not {}", t.str()));
  }
  switch (t.scalar_kind()) {
    case ScalarKind::kInt32: return Value::of_i32(static_cast<int32_t>(v));
    case ScalarKind::kInt64: return Value::of_i64(v);
    case ScalarKind::kFloat32: return Value::of_f32(static_cast<float>(v));
    default: return Value::of_f64(static_cast<double>(v));
  }
}

int64_t parse_count(const std::string& s) {
  int64_t n = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
  if (ec != std::errc() || p != s.data() + s.size() || n < 0) {
    usage(fmt::format("bad element count '{}'", s));
  }
  return n;
}

struct ArgSpec {
  Type type;  // host view
  std::optional<Value> value;
  std::string out_path;
};

// TYPE, TYPE(VALUE) for scalars and records, or T[](ITEM,...) where an
// item is file:P, zeros:N, rand:N, range:N, out:P or an element literal.
ArgSpec parse_arg(const std::string& text, const MethodTable& table, Rng& rng) {
  ArgSpec spec;
  size_t open = std::string::npos;
  int depth = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') ++depth;
    if (text[i] == '}') --depth;
    if (text[i] == '(' && depth == 0) {
      open = i;
      break;
    }
  }
  if (open == std::string::npos) {
    spec.type = parse_type(text, table);
    return spec;
  }
  if (text.back() != ')') usage(fmt::format("unbalanced --arg '{}'", text));
  spec.type = parse_type(text.substr(0, open), table);
  std::string body = text.substr(open + 1, text.size() - open - 2);
  if (!spec.type.is_array()) {
    spec.value = parse_value(spec.type, body);
    return spec;
  }
  Type elem = spec.type.element();
  std::vector<Value> items;
  bool have_data = false;
  for (const std::string& item : split_top(body, ',')) {
    size_t colon = item.find(':');
    std::string head = colon == std::string::npos ? "" : item.substr(0, colon);
    std::string rest = colon == std::string::npos ? "" : item.substr(colon + 1);
    if (head == "out") {
      spec.out_path = rest;
      continue;
    }
    have_data = true;
    if (head == "file") {
      Value a = runtime::read_array_file(rest, elem);
      for (int64_t i = 0; i < a.array->length; ++i) items.push_back(a.array->get(i));
    } else if (head == "zeros") {
      Value a = Value::new_array(elem, parse_count(rest));
      for (int64_t i = 0; i < a.array->length; ++i) items.push_back(a.array->get(i));
    } else if (head == "rand") {
      for (int64_t i = 0, n = parse_count(rest); i < n; ++i) {
        items.push_back(random_element(elem, rng));
      }
    } else if (head == "range") {
      for (int64_t i = 1, n = parse_count(rest); i <= n; ++i) {
        items.push_back(int_element(elem, i));
      }
    } else if (item.empty()) {
      have_data = !items.empty();
    } else {
      items.push_back(parse_value(elem, item));
    }
  }
  if (!have_data) usage(fmt::format("array --arg '{}' has no data", text));
  Value a = Value::new_array(elem, static_cast<int64_t>(items.size()));
  for (size_t i = 0; i < items.size(); ++i) {
    a.array->set(static_cast<int64_t>(i), items[i]);
  }
  spec.value = a;
  return spec;
}

Type device_view(Type t) {
  return t.is_array() ? Type::device_array(t.element(), AddressSpace::kGlobal)
                      : t;
}

device::Dim3i parse_dim(const std::string& s, std::string_view flag) {
  std::vector<std::string> parts = split_top(s, ',');
  if (parts.empty() || parts.size() > 3) usage(fmt::format("bad {} '{}'", flag, s));
  int64_t v[3] = {1, 1, 1};
  for (size_t i = 0; i < parts.size(); ++i) {
    auto [p, ec] = std::from_chars(parts[i].data(),
                                   parts[i].data() + parts[i].size(), v[i]);
    if (ec != std::errc() || p != parts[i].data() + parts[i].size()) {
      usage(fmt::format("bad {} '{}'", flag, s));
    }
  }
  return {v[0], v[1], v[2]};
}

// ---- compile -----------------------------------------------------------

// Every function with annotated parameters, at least one of them an array:
// the shape of a kernel whose types are known without --arg.
std::vector<std::pair<std::string, std::vector<Type>>> kernel_signatures(
    const MethodTable& table, bool device) {
  std::vector<std::pair<std::string, std::vector<Type>>> out;
  std::vector<MethodPtr> methods = table.all_methods();
  std::stable_sort(methods.begin(), methods.end(),
                   [](const MethodPtr& a, const MethodPtr& b) {
                     return a->id < b->id;
                   });
  for (const MethodPtr& m : methods) {
    bool ok = m->arity() > 0, any_array = false;
    std::vector<Type> types;
    for (const ParamConstraint& c : m->constraints) {
      if (c.kind == ParamConstraint::Kind::kScalar) {
        types.push_back(Type::scalar(c.scalar));
      } else if (c.kind == ParamConstraint::Kind::kArrayOf && !c.record) {
        Type elem = Type::scalar(c.scalar);
        types.push_back(device ? Type::device_array(elem, AddressSpace::kGlobal)
                               : Type::array(elem));
        any_array = true;
      } else {
        ok = false;
      }
    }
    if (ok && any_array) out.emplace_back(m->name, std::move(types));
  }
  return out;
}

std::string signature(std::string_view name, const std::vector<Type>& types) {
  std::string s = fmt::format("{}(", name);
  for (size_t i = 0; i < types.size(); ++i) {
    s += (i ? ", " : "") + types[i].str();
  }
  return s + ")";
}

int do_compile(const Options& o, const MethodTable& table,
               const ast::Program& program, std::ostream& out) {
  bool device = o.target == "device";
  std::vector<std::string> stages;
  for (const std::string& s : kStages) {
    if (std::find(o.dumps.begin(), o.dumps.end(), s) != o.dumps.end()) {
      stages.push_back(s);
    }
  }
  if (!device && std::find(stages.begin(), stages.end(), "devlir") != stages.end()) {
    usage("--dump=devlir needs --target=device");
  }

  std::vector<std::pair<std::string, std::vector<Type>>> kernels;
  if (!o.kernel.empty()) {
    Rng rng(o.seed);
    std::vector<Type> types;
    for (const std::string& a : o.args) {
      Type t = parse_arg(a, table, rng).type;
      types.push_back(device ? device_view(t) : t);
    }
    if (!table.has_function(o.kernel)) {
      usage(fmt::format("no function named {}", o.kernel));
    }
    kernels.emplace_back(o.kernel, std::move(types));
  } else {
    kernels = kernel_signatures(table, device);
  }

  // Headers appear only when more than one section is printed.
  size_t sections = 0;
  for (const std::string& s : stages) sections += s == "ast" ? 1 : kernels.size();
  auto emit = [&](std::string_view stage, std::string_view what,
                  const std::string& text) {
    if (sections > 1) out << fmt::format(";; {} {}\n", stage, what);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
  };

  if (!stages.empty() && stages.front() == "ast") {
    emit("ast", o.file, ast::dump_sexpr(program));
  }
  auto wants = [&](std::string_view s) {
    return std::find(stages.begin(), stages.end(), s) != stages.end();
  };
  for (const auto& [name, types] : kernels) {
    std::string sig = signature(name, types);
    if (device) {
      device::DeviceTarget target;
      device::CompileTrace trace;
      device::CompiledKernel k =
          device::compile_kernel(table, name, types, target, &trace);
      if (wants("hir")) emit("hir", sig, trace.hir);
      if (wants("lir")) emit("lir", sig, trace.lir);
      if (wants("lir-opt")) emit("lir-opt", sig, trace.lir_opt);
      if (wants("devlir")) emit("devlir", sig, lir::print(k.module));
      if (stages.empty()) {
        out << fmt::format(
            "{}: {} LIR instructions, {} calls, {} generic memory ops, "
            "{} param bytes, {} shared bytes\n",
            sig, k.stats.lir_instructions, k.stats.calls,
            k.stats.generic_memory_ops, k.param_bytes, k.shared_bytes);
      }
    } else {
      hir::Specializer spec(table);
      auto fn = spec.specialize(name, types);
      if (wants("hir")) emit("hir", sig, hir::dump(*fn));
      lir::Module m = lir::lower_hir(*fn);
      if (wants("lir")) emit("lir", sig, lir::print(m));
      lir::run_passes(m, lir::default_pipeline());
      if (wants("lir-opt")) emit("lir-opt", sig, lir::print(m));
      if (stages.empty()) {
        size_t n = 0;
        for (const lir::Function& f : m.functions) n += f.instruction_count();
        out << fmt::format("{} -> {}: {} LIR instructions\n", sig,
                           fn->return_type.str(), n);
      }
    }
  }
  return kExitOk;
}

// ---- execution -----------------------------------------------------------

class Session {
 public:
  Session(const Options& o, MethodTable& table, std::ostream& out)
      : o_(o), table_(table), out_(out), ctx_(context_options(o)), rng_(o.seed),
        start_(CounterSnapshot::take()) {}

  static runtime::ContextOptions context_options(const Options& o) {
    runtime::ContextOptions opts;
    if (!o.cost_table.empty()) {
      try {
        opts.costs = vm::CostTable::from_json(json::parse(read_file(o.cost_table)));
      } catch (const json::exception& e) {
        usage(fmt::format("{}: {}", o.cost_table, e.what()));
      }
    }
    opts.bypass_cache = o.no_cache;
    return opts;
  }

  void record(std::string_view op, const vm::ExecutionReport& r) {
    json j = r.to_json();
    j["op"] = op;
    ops_.push_back(std::move(j));
    cycles_ += r.cycles;
  }

  // Traps abort a launch; report the first one and fail with exit code 2.
  void check_traps(const vm::ExecutionReport& r) {
    if (r.traps.empty()) return;
    const vm::TrapReport& t = r.traps.front();
    std::string what = t.code == lir::kTrapBounds   ? "bounds error"
                       : t.code == lir::kTrapDivide ? "divide error"
                                                    : fmt::format("throw({})", t.code);
    throw Error(ErrorKind::kRuntime,
                fmt::format("kernel {} trapped: {} in block ({},{},{}) thread "
                            "({},{},{})",
                            r.kernel, what, t.block.x, t.block.y, t.block.z,
                            t.thread.x, t.thread.y, t.thread.z));
  }

  json profile() const {
    CounterSnapshot d = CounterSnapshot::take() - start_;
    runtime::CacheStats s = ctx_.stats();
    json j;
    j["operations"] = ops_;
    j["total_cycles"] = cycles_;
    j["compiler"] = {{"inference_runs", d.inference_runs},
                     {"lowering_runs", d.lowering_runs},
                     {"codegen_runs", d.codegen_runs},
                     {"kernel_compiles", d.kernel_compiles}};
    j["cache"] = {{"hits", s.hits},
                  {"misses", s.misses},
                  {"compiles", s.compiles},
                  {"launches", s.launches}};
    return j;
  }

  void write_profile() const {
    if (o_.profile_out.empty()) return;
    std::ofstream f(o_.profile_out);
    if (!f) usage(fmt::format("cannot write {}", o_.profile_out));
    f << profile().dump(2) << '\n';
  }

  // launch subcommand: one kernel, arguments from --arg.
  void launch() {
    if (o_.kernel.empty()) usage("launch needs --kernel");
    std::vector<ArgSpec> specs;
    for (const std::string& a : o_.args) specs.push_back(parse_arg(a, table_, rng_));
    std::vector<KernelArg> args;
    for (const ArgSpec& s : specs) {
      if (!s.value) usage(fmt::format("--arg of type {} needs a value", s.type.str()));
      if (s.type.is_array()) {
        args.push_back(ctx_.upload(*s.value));
      } else {
        args.push_back(*s.value);
      }
    }
    vm::LaunchConfig cfg{parse_dim(o_.grid, "--grid"), parse_dim(o_.block, "--block"),
                         o_.shmem};
    vm::ExecutionReport r = ctx_.launch(table_, o_.kernel, args, cfg);
    record("launch", r);
    check_traps(r);
    for (size_t i = 0; i < specs.size(); ++i) {
      if (specs[i].out_path.empty()) continue;
      runtime::write_array_file(specs[i].out_path,
                                ctx_.download(std::get<ArrayHandle>(args[i])));
    }
  }

  // run subcommand: interprets main() with the device API as builtins.
  Value run() {
    InterpreterOptions opts;
    opts.builtin_hook = [this](std::string_view name, const std::vector<Value>& a,
                               SourceSpan span) { return builtin(name, a, span); };
    return interpret_reference(table_, "main", {}, opts);
  }

  DeviceContext& context() { return ctx_; }
  uint64_t cycles() const { return cycles_; }

 private:
  ArrayHandle handle_arg(const Value& v, std::string_view fn, SourceSpan span) {
    auto h = runtime::as_handle(v);
    if (!h) {
      throw Error(ErrorKind::kRuntime,
                  fmt::format("{} expects a device array, got {}", fn, v.type.str()),
                  span);
    }
    return *h;
  }

  static std::string symbol_arg(const Value& v, std::string_view fn,
                                SourceSpan span) {
    if (v.type.kind() != TypeKind::kFunction) {
      throw Error(ErrorKind::kRuntime,
                  fmt::format("{} expects a function name, got {}", fn, v.type.str()),
                  span);
    }
    return v.type.symbol();
  }

  static void arity(const std::vector<Value>& a, size_t n, std::string_view fn,
                    SourceSpan span, bool at_least = false) {
    if (at_least ? a.size() >= n : a.size() == n) return;
    throw Error(ErrorKind::kNoMethod,
                fmt::format("{} takes {}{} arguments, got {}", fn,
                            at_least ? "at least " : "", n, a.size()),
                span);
  }

  std::optional<Value> builtin(std::string_view name, const std::vector<Value>& a,
                               SourceSpan span) {
    if (name == "upload") {
      arity(a, 1, name, span);
      if (!a[0].type.is_array()) {
        throw Error(ErrorKind::kRuntime, "upload expects a host array", span);
      }
      return runtime::wrap_handle(ctx_.upload(a[0]));
    }
    if (name == "download") {
      arity(a, 1, name, span);
      return ctx_.download(handle_arg(a[0], name, span));
    }
    if (name == "similar") {
      arity(a, 1, name, span);
      return runtime::wrap_handle(ctx_.similar(handle_arg(a[0], name, span)));
    }
    if (name == "free") {
      arity(a, 1, name, span);
      ctx_.free(handle_arg(a[0], name, span));
      return Value::nothing();
    }
    if (name == "rand") {
      // rand(n) or rand(T, n)
      Type elem = Type::float64();
      if (a.size() == 2 && a[0].type.kind() == TypeKind::kFunction) {
        auto k = scalar_from_name(a[0].type.symbol());
        if (!k) throw Error(ErrorKind::kRuntime, "rand: bad element type", span);
        elem = Type::scalar(*k);
      } else {
        arity(a, 1, name, span);
      }
      const Value& n = a.back();
      if (!n.is_scalar() || !n.type.is_integer() || n.as_i64() < 0) {
        throw Error(ErrorKind::kRuntime, "rand: bad length", span);
      }
      Value arr = Value::new_array(elem, n.as_i64());
      for (int64_t i = 0; i < n.as_i64(); ++i) arr.array->set(i, random_element(elem, rng_));
      return arr;
    }
    if (name == "println") {
      std::string line;
      for (size_t i = 0; i < a.size(); ++i) line += (i ? " " : "") + a[i].str();
      out_ << line << '\n';
      return Value::nothing();
    }
    if (name == "broadcast") {
      arity(a, 2, name, span, true);
      std::string fn = symbol_arg(a[0], name, span);
      std::vector<ArrayHandle> inputs;
      for (size_t i = 1; i < a.size(); ++i) inputs.push_back(handle_arg(a[i], name, span));
      vm::ExecutionReport r;
      ArrayHandle h = arrays::broadcast_apply(ctx_, table_, fn, inputs, &r);
      if (!r.kernel.empty()) {
        record("broadcast", r);
        check_traps(r);
      }
      return runtime::wrap_handle(h);
    }
    if (name == "reduce") {
      arity(a, 3, name, span);
      std::string op = symbol_arg(a[0], name, span);
      arrays::ReduceResult res =
          arrays::reduce(ctx_, table_, op, a[1], handle_arg(a[2], name, span));
      for (const vm::ExecutionReport& r : res.launches) {
        record("reduce", r);
        check_traps(r);
      }
      return res.value;
    }
    if (name == "launch") {
      // launch(kernel, grid, block, args...), one-dimensional geometry.
      arity(a, 3, name, span, true);
      std::string k = symbol_arg(a[0], name, span);
      for (size_t i = 1; i < 3; ++i) {
        if (!a[i].is_scalar() || !a[i].type.is_integer()) {
          throw Error(ErrorKind::kRuntime, "launch: grid and block must be integers",
                      span);
        }
      }
      std::vector<KernelArg> args;
      for (size_t i = 3; i < a.size(); ++i) {
        if (auto h = runtime::as_handle(a[i])) {
          args.push_back(*h);
        } else {
          args.push_back(a[i]);
        }
      }
      vm::LaunchConfig cfg{{a[1].as_i64(), 1, 1}, {a[2].as_i64(), 1, 1}, 0};
      vm::ExecutionReport r = ctx_.launch(table_, k, args, cfg);
      record("launch", r);
      check_traps(r);
      return Value::nothing();
    }
    return std::nullopt;
  }

  const Options& o_;
  MethodTable& table_;
  std::ostream& out_;
  DeviceContext ctx_;
  Rng rng_;
  CounterSnapshot start_;
  json ops_ = json::array();
  uint64_t cycles_ = 0;
};

int execute(const std::string& command, const Options& o, MethodTable& table,
            std::ostream& out) {
  Session session(o, table, out);
  bool bench = command == "bench";
  auto finish = [&] {
    session.write_profile();
    if (bench) out << session.profile().dump(2) << '\n';
  };
  try {
    if (command == "launch" || (bench && !o.kernel.empty())) {
      session.launch();
      if (!bench) {
        out << fmt::format("{}: {} cycles\n", o.kernel, session.cycles());
      }
    } else {
      Value v = session.run();
      if (!bench && !v.type.is_nothing()) out << v.str() << '\n';
    }
  } catch (...) {
    session.write_profile();
    throw;
  }
  finish();
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("file", o.file, "KSL source file")->required();
}

void add_launch_flags(CLI::App* sub, Options& o, bool kernel_required) {
  auto* k = sub->add_option("--kernel", o.kernel, "Kernel function to launch");
  if (kernel_required) k->required();
  sub->add_option("--grid", o.grid, "Grid size x[,y[,z]]");
  sub->add_option("--block", o.block, "Block size x[,y[,z]]");
  sub->add_option("--shmem", o.shmem, "Dynamic shared memory in bytes");
  sub->add_option("--arg", o.args,
                  "Kernel argument: TYPE(VALUE), T[](file:P,zeros:N,rand:N,"
                  "range:N,out:P,...)");
}

void add_exec_flags(CLI::App* sub, Options& o) {
  sub->add_option("--cost-table", o.cost_table, "Cost table JSON file");
  sub->add_flag("--no-cache", o.no_cache, "Recompile on every launch");
  sub->add_option("--seed", o.seed, "Seed for random inputs");
  sub->add_option("--profile-out", o.profile_out, "Write the profile document here");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Options o;
  CLI::App app("KSL compiler and SIMT simulator", "kernelforge");
  app.require_subcommand(1);

  CLI::App* compile = app.add_subcommand("compile", "Compile and dump stages");
  add_common(compile, o);
  compile->add_option("--target", o.target, "host or device")
      ->check(CLI::IsMember({"host", "device"}));
  compile->add_option("--dump", o.dumps, "ast,hir,lir,lir-opt,devlir")
      ->delimiter(',')
      ->check(CLI::IsMember(kStages));
  compile->add_option("--kernel", o.kernel, "Function to compile (types from --arg)");
  compile->add_option("--arg", o.args, "Argument type, as for launch");

  CLI::App* run = app.add_subcommand("run", "Interpret main() with device builtins");
  add_common(run, o);
  add_exec_flags(run, o);

  CLI::App* launch = app.add_subcommand("launch", "Launch one kernel");
  add_common(launch, o);
  add_launch_flags(launch, o, true);
  add_exec_flags(launch, o);

  CLI::App* bench = app.add_subcommand("bench", "Run or launch and print the profile");
  add_common(bench, o);
  add_launch_flags(bench, o, false);
  add_exec_flags(bench, o);

  CLI::App* costs = app.add_subcommand("dump-costs", "Print the cost table");
  costs->add_option("--cost-table", o.cost_table, "Cost table JSON file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "kernelforge: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* command = app.get_subcommands().front();
  std::string name = command->get_name();
  try {
    if (name == "dump-costs") {
      out << Session::context_options(o).costs.to_json().dump(2) << '\n';
      return kExitOk;
    }
    std::string source = read_file(o.file);
    MethodTable table;
    ast::Program program = parse(source);
    table.load(program);
    if (name == "compile") return do_compile(o, table, program, out);
    return execute(name, o, table, out);
  } catch (const Error& e) {
    err << e.diagnostic(o.file) << '\n';
    return exit_code(e.kind());
  }
}

}  // namespace kf::cli
