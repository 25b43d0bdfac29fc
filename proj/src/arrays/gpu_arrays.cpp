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

#include "kf/arrays/gpu_arrays.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "kf/frontend/parser.hpp"
#include "kf/hir/inference.hpp"
#include "kf/support/hash.hpp"

namespace kf::arrays {
namespace {

using runtime::ArrayHandle;
using runtime::DeviceContext;

uint64_t hash_text(std::string_view s) {
  uint64_t h = mix64(s.size());
  for (unsigned char c : s) h = hash_combine(h, c);
  return h;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '_';
  });
}

std::string tag_for(std::string_view fn) {
  return is_identifier(fn) ? std::string(fn)
                           : fmt::format("op{:08x}", hash_text(fn) & 0xffffffff);
}

void define_once(MethodTable& table, const std::string& name,
                 const std::string& source) {
  if (!table.has_function(name)) table.load_source(source);
}

void undot(ast::Expr& e, const std::vector<std::string>& inputs) {
  switch (e.kind) {
    case ast::ExprKind::kDotCall:
      e.kind = ast::ExprKind::kCall;
      break;
    case ast::ExprKind::kDotBinary:
      e.kind = ast::ExprKind::kBinary;
      break;
    case ast::ExprKind::kVar: {
      auto it = std::find(inputs.begin(), inputs.end(), e.name);
      if (it == inputs.end()) {
        throw Error(ErrorKind::kUsage,
                    fmt::format("fused expression uses {} which is not an input",
                                e.name),
                    e.span);
      }
      e.name = fmt::format("x{}", it - inputs.begin() + 1);
      return;
    }
    case ast::ExprKind::kIndex:
    case ast::ExprKind::kField:
      throw Error(ErrorKind::kUsage,
                  "fused expressions cannot index or access fields", e.span);
    default:
      break;
  }
  for (auto& a : e.args) undot(*a, inputs);
}

std::string params(size_t n, std::string_view prefix) {
  std::vector<std::string> xs;
  for (size_t i = 1; i <= n; ++i) xs.push_back(fmt::format("{}{}", prefix, i));
  return fmt::format("{}", fmt::join(xs, ", "));
}

// Applies `op` to two expressions in source form.
std::string apply(std::string_view op, std::string_view a, std::string_view b) {
  if (is_identifier(op)) return fmt::format("{}({}, {})", op, a, b);
  return fmt::format("({} {} {})", a, op, b);
}

vm::LaunchConfig linear_config(int64_t n) {
  vm::LaunchConfig c;
  int64_t block = std::min<int64_t>(n, kBlockSize);
  c.block = {block, 1, 1};
  c.grid = {(n + block - 1) / block, 1, 1};
  return c;
}

// Ascending offsets keep lane 1's result in input order, so only
// associativity is needed.
std::string warp_fold(std::string_view op, std::string_view pad) {
  return fmt::format(
      "{0}offset = 1\n"
      "{0}while offset < warpsize()\n"
      "{0}  v = {1}\n"
      "{0}  offset = offset * 2\n"
      "{0}end\n",
      pad, apply(op, "v", "shfl_down(v, offset)"));
}

std::string reduce_kernel(const std::string& name, std::string_view op,
                          int64_t slots, std::string_view finish) {
  return fmt::format(
      "function {0}(input, partials, neutral)\n"
      "  t = threadIdx().x\n"
      "  i = (blockIdx().x - 1) * blockDim().x + t\n"
      "  v = neutral\n"
      "  if i <= length(input)\n"
      "    v = input[i]\n"
      "  end\n"
      "  lane = (t - 1) % warpsize() + 1\n"
      "  w = (t - 1) / warpsize() + 1\n"
      "{1}"
      "  slots = shared_array(neutral, {2})\n"
      "  if lane == 1\n"
      "    slots[w] = v\n"
      "  end\n"
      "  sync_threads()\n"
      "  if w == 1\n"
      "    nw = (blockDim().x + warpsize() - 1) / warpsize()\n"
      "    chunk = (nw + warpsize() - 1) / warpsize()\n"
      "    v = neutral\n"
      "    j = (lane - 1) * chunk + 1\n"
      "    last = min(lane * chunk, nw)\n"
      "    while j <= last\n"
      "      v = {3}\n"
      "      j = j + 1\n"
      "    end\n"
      "{4}"
      "    if lane == 1\n"
      "      {5}\n"
      "    end\n"
      "  end\n"
      "end\n",
      name, warp_fold(op, "  "), slots, apply(op, "v", "slots[j]"),
      warp_fold(op, "    "), finish);
}

}  // namespace

std::string fuse(MethodTable& table, const ast::Expr& dotted,
                 const std::vector<std::string>& inputs) {
  ast::ExprPtr e = dotted.clone();
  undot(*e, inputs);
  std::string body = ast::to_source(*e);
  std::string name = fmt::format("__fused{}_{:016x}", inputs.size(),
                                 hash_text(body));
  define_once(table, name,
              fmt::format("function {}({})\n  return {}\nend\n", name,
                          params(inputs.size(), "x"), body));
  return name;
}

std::string fuse(MethodTable& table, std::string_view dotted_source,
                 const std::vector<std::string>& inputs) {
  return fuse(table, *parse_expression(dotted_source), inputs);
}

BroadcastPlan plan_broadcast(DeviceContext& ctx, MethodTable& table,
                             std::string_view element_fn,
                             const std::vector<ArrayHandle>& inputs) {
  if (inputs.empty()) {
    throw Error(ErrorKind::kUsage, "broadcast needs at least one input");
  }
  std::vector<Type> elems;
  for (const ArrayHandle& h : inputs) {
    if (h.length != inputs[0].length) {
      throw Error(ErrorKind::kUsage,
                  fmt::format("broadcast length mismatch: {} vs {}",
                              inputs[0].length, h.length));
    }
    if (!ctx.is_live(h)) ctx.download(h);  // reports the handle error
    elems.push_back(h.element);
  }
  hir::Specializer spec(table, ctx.target().config().inference,
                        ctx.target().inference_hooks());
  auto fn = spec.specialize(element_fn, elems);
  if (!fn->return_type.is_concrete() || !is_storable(fn->return_type.type())) {
    throw Error(ErrorKind::kInstability,
                fmt::format("{} has no storable element type", fn->signature()));
  }
  BroadcastPlan plan;
  plan.element_fn = std::string(element_fn);
  plan.kernel = fmt::format("__broadcast{}_{}", inputs.size(), tag_for(element_fn));
  std::vector<std::string> reads;
  for (size_t i = 1; i <= inputs.size(); ++i) reads.push_back(fmt::format("a{}[i]", i));
  define_once(table, plan.kernel,
              fmt::format("function {}(out, {})\n"
                          "  i = (blockIdx().x - 1) * blockDim().x + threadIdx().x\n"
                          "  if i <= length(out)\n"
                          "    out[i] = {}({})\n"
                          "  end\n"
                          "end\n",
                          plan.kernel, params(inputs.size(), "a"), element_fn,
                          fmt::join(reads, ", ")));
  plan.inputs = inputs;
  plan.output = ctx.allocate(fn->return_type.type(), inputs[0].length);
  plan.config = linear_config(std::max<int64_t>(inputs[0].length, 1));
  return plan;
}

vm::ExecutionReport execute(DeviceContext& ctx, const MethodTable& table,
                            const BroadcastPlan& plan) {
  if (plan.output.length == 0) return {};
  std::vector<runtime::KernelArg> args{plan.output};
  for (const ArrayHandle& h : plan.inputs) args.emplace_back(h);
  return ctx.launch(table, plan.kernel, args, plan.config);
}

ArrayHandle broadcast_apply(DeviceContext& ctx, MethodTable& table,
                            std::string_view element_fn,
                            const std::vector<ArrayHandle>& inputs,
                            vm::ExecutionReport* report) {
  BroadcastPlan plan = plan_broadcast(ctx, table, element_fn, inputs);
  vm::ExecutionReport r = execute(ctx, table, plan);
  if (r.trapped()) {
    ctx.free(plan.output);
    throw Error(ErrorKind::kRuntime,
                fmt::format("broadcast of {} trapped with code {}", element_fn,
                            r.traps[0].code));
  }
  if (report) *report = std::move(r);
  return plan.output;
}

ReduceResult reduce(DeviceContext& ctx, MethodTable& table, std::string_view op,
                    const Value& neutral, const ArrayHandle& input,
                    ReduceOptions options) {
  if (!ctx.is_live(input)) ctx.download(input);
  if (!(neutral.type == input.element)) {
    throw Error(ErrorKind::kUsage,
                fmt::format("neutral element is {} but the array holds {}",
                            neutral.type.str(), input.element.str()));
  }
  ReduceResult result;
  result.value = neutral;
  if (input.length == 0) return result;

  int64_t warp = ctx.target().config().warp_size;
  int64_t slots = std::max<int64_t>(1, kBlockSize / warp);
  if (options.atomic) {
    bool integer = input.element == Type::int32() || input.element == Type::int64();
    if (op != "+" || !integer || neutral.as_i64() != 0) {
      throw Error(ErrorKind::kUsage,
                  "atomic reduction only sums Int32 or Int64 with neutral 0");
    }
    std::string name = fmt::format("__reduce_atomic_w{}", warp);
    define_once(table, name,
                reduce_kernel(name, "+", slots, "atomic_add(partials, 1, v)"));
    ArrayHandle total = ctx.allocate(input.element, 1);
    vm::LaunchConfig c;
    c.block = {kBlockSize, 1, 1};
    c.grid = {(input.length + kBlockSize - 1) / kBlockSize, 1, 1};
    result.launches.push_back(ctx.launch(table, name, {input, total, neutral}, c));
    result.value = ctx.download(total).array->get(0);
    ctx.free(total);
    return result;
  }

  std::string name = fmt::format("__reduce_{}_w{}", tag_for(op), warp);
  define_once(table, name,
              reduce_kernel(name, op, slots, "partials[blockIdx().x] = v"));
  ArrayHandle current = input;
  while (true) {
    int64_t blocks = (current.length + kBlockSize - 1) / kBlockSize;
    ArrayHandle partials = ctx.allocate(input.element, blocks);
    vm::LaunchConfig c;
    c.block = {kBlockSize, 1, 1};
    c.grid = {blocks, 1, 1};
    vm::ExecutionReport r = ctx.launch(table, name, {current, partials, neutral}, c);
    bool trapped = r.trapped();
    int64_t code = trapped ? r.traps[0].code : 0;
    result.launches.push_back(std::move(r));
    if (current.region != input.region) ctx.free(current);
    current = partials;
    if (trapped) {
      ctx.free(current);
      throw Error(ErrorKind::kRuntime,
                  fmt::format("reduction with {} trapped with code {}", op, code));
    }
    if (blocks == 1) break;
  }
  result.value = ctx.download(current).array->get(0);
  ctx.free(current);
  return result;
}

}  // namespace kf::arrays
