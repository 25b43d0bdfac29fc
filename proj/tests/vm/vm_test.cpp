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

#include <cmath>
#include <cstring>
#include <random>

#include <fmt/format.h>

#include "doctest.h"
#include "kf/device/target.hpp"
#include "kf/lir/builder.hpp"
#include "kf/vm/device.hpp"
#include "support/program_gen.hpp"

namespace kf::vm {
namespace {

using device::CompiledKernel;
using device::DeviceTargetConfig;
using device::ParamSlot;

constexpr const char* kVadd = R"(
function vadd(a, b, c)
  i = (blockIdx().x - 1) * blockDim().x + threadIdx().x
  c[i] = a[i] + b[i]
  return
end
)";

constexpr size_t kGeneric = 0;
constexpr size_t kGlobal = static_cast<size_t>(AddressSpace::kGlobal);

Type array_of(Type elem) { return Type::device_array(elem, AddressSpace::kGlobal); }

// One kernel argument as the bytes of its value image.
struct Arg {
  Type type;
  std::vector<uint8_t> image;
};

Arg dev_array(Type elem, uint64_t offset, int64_t length) {
  Arg a{array_of(elem), std::vector<uint8_t>(kDescriptorSize)};
  std::memcpy(a.image.data() + kDescriptorBaseOffset, &offset, 8);
  std::memcpy(a.image.data() + kDescriptorLengthOffset, &length, 8);
  return a;
}

Arg host_value(const Value& v) {
  Arg a{v.type, std::vector<uint8_t>(v.type.size_bytes())};
  store_value(v, a.image.data());
  return a;
}

std::vector<uint8_t> pack(DeviceState& state, const CompiledKernel& k,
                          const std::vector<Arg>& args) {
  std::vector<uint8_t> buf(k.param_bytes);
  for (const ParamSlot& slot : k.params) {
    const Arg& arg = args.at(slot.source_arg);
    if (slot.kind == ParamSlot::Kind::kByReference) {
      uint64_t copy = state.allocate(arg.image.size());
      state.write(copy, arg.image);
      uint64_t ptr = window_base(AddressSpace::kGlobal) + copy;
      std::memcpy(buf.data() + slot.offset, &ptr, 8);
    } else {
      std::memcpy(buf.data() + slot.offset, arg.image.data(), slot.size);
    }
  }
  return buf;
}

template <typename T>
uint64_t upload(DeviceState& state, const std::vector<T>& data) {
  uint64_t off = state.allocate(data.size() * sizeof(T));
  if (!data.empty()) {
    state.write(off, {reinterpret_cast<const uint8_t*>(data.data()),
                      data.size() * sizeof(T)});
  }
  return off;
}

template <typename T>
std::vector<T> download(const DeviceState& state, uint64_t off, size_t n) {
  std::vector<uint8_t> bytes = state.read(off, n * sizeof(T));
  std::vector<T> out(n);
  if (n) std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

LaunchConfig config(int64_t grid, int64_t block) {
  LaunchConfig c;
  c.grid = {grid, 1, 1};
  c.block = {block, 1, 1};
  return c;
}

DeviceTargetConfig warp(int w) {
  DeviceTargetConfig c;
  c.warp_size = w;
  return c;
}

struct Vadd {
  DeviceState state;
  CompiledKernel kernel;
  uint64_t a = 0, b = 0, c = 0;
  std::vector<float> ha, hb;
  std::vector<uint8_t> params;

  explicit Vadd(int n, DeviceTargetConfig cfg = {}, uint32_t seed = 1) {
    MethodTable table;
    table.load_source(kVadd);
    Type arr = array_of(Type::float32());
    kernel = device::compile_kernel(table, "vadd", {arr, arr, arr}, cfg);
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-10, 10);
    for (int i = 0; i < n; ++i) {
      ha.push_back(dist(rng));
      hb.push_back(dist(rng));
    }
    a = upload(state, ha);
    b = upload(state, hb);
    c = state.allocate(n * 4);
    params = pack(state, kernel,
                  {dev_array(Type::float32(), a, n), dev_array(Type::float32(), b, n),
                   dev_array(Type::float32(), c, n)});
  }
};

TEST_CASE("an empty kernel costs the launch constant") {
  MethodTable table;
  table.load_source("function empty()\n  return\nend\n");
  CompiledKernel k = device::compile_kernel(table, "empty", {});
  DeviceState state;
  ExecutionReport r = launch(state, k, config(1, 1), {});
  CHECK(r.cycles == state.costs().launch);
  CHECK(r.cycles == 100);
  for (size_t s = 0; s < kNumAddressSpaces; ++s) CHECK(r.events.stores[s] == 0);
  CHECK(!r.trapped());
  CHECK(state.launches() == 1);
}

TEST_CASE("vadd matches the reference interpreter with exact event counts") {
  Vadd v(100);
  ExecutionReport r = launch(v.state, v.kernel, config(1, 100), v.params);
  std::vector<float> got = download<float>(v.state, v.c, 100);

  MethodTable table;
  table.load_source(kVadd);
  Value ra = array_from(v.ha), rb = array_from(v.hb);
  Value rc = array_from(std::vector<float>(100));
  device::run_reference_grid(table, "vadd", {ra, rb, rc}, {1, 1, 1},
                             {100, 1, 1}, device::DeviceTarget());
  std::vector<float> want = array_to<float>(rc);
  for (int i = 0; i < 100; ++i) {
    CHECK(got[i] == v.ha[i] + v.hb[i]);
    CHECK(std::memcmp(&got[i], &want[i], 4) == 0);
  }
  CHECK(r.events.loads[kGlobal] == 200);
  CHECK(r.events.stores[kGlobal] == 100);
  CHECK(r.events.generic_events() == 0);
  CHECK(r.events.divergent_branches == 0);
  CHECK(!r.trapped());
}

TEST_CASE("an out-of-bounds index traps with the bounds code") {
  MethodTable table;
  table.load_source(R"(
function touch(a)
  i = threadIdx().x
  a[i] = a[1] + 1.0
  return
end
)");
  CompiledKernel k = device::compile_kernel(table, "touch", {array_of(Type::float64())});
  DeviceState state;
  uint64_t a = state.allocate(800);
  auto params = pack(state, k, {dev_array(Type::float64(), a, 100)});
  ExecutionReport r = launch(state, k, config(1, 101), params);
  REQUIRE(r.traps.size() == 1);
  CHECK(r.traps[0].block.x == 0);
  CHECK(r.traps[0].thread.x == 100);
  CHECK(r.traps[0].code == lir::kTrapBounds);
  CHECK(r.events.traps == 1);
  // Warps advance in lockstep, so the trap lands before any warp stores.
  CHECK(download<double>(state, a, 1)[0] == 0.0);
}

TEST_CASE("divergent branches rejoin with the full mask") {
  MethodTable table;
  table.load_source(R"(
function branchy(out, after)
  i = threadIdx().x
  if i <= 2
    out[i] = 1
  else
    out[i] = 2
  end
  after[i] = 5
  return
end
)");
  Type arr = array_of(Type::int64());
  CompiledKernel k = device::compile_kernel(table, "branchy", {arr, arr}, warp(4));
  DeviceState state;
  uint64_t out = state.allocate(32), after = state.allocate(32);
  auto params = pack(state, k, {dev_array(Type::int64(), out, 4),
                                dev_array(Type::int64(), after, 4)});
  ExecutionReport r = launch(state, k, config(1, 4), params);
  CHECK(download<int64_t>(state, out, 4) == std::vector<int64_t>{1, 1, 2, 2});
  CHECK(download<int64_t>(state, after, 4) == std::vector<int64_t>{5, 5, 5, 5});
  CHECK(r.events.divergent_branches == 1);
  // One store per side, then one with all four lanes after the rejoin.
  CHECK(r.events.warp_memory_ops[kGlobal] == 3);
  CHECK(r.events.stores[kGlobal] == 8);
  CHECK(r.events.max_stack_depth == 3);
}

TEST_CASE("a uniform branch never pushes") {
  MethodTable table;
  table.load_source(R"(
function uniform(out)
  i = threadIdx().x
  if blockDim().x > 2
    out[i] = 1
  else
    out[i] = 2
  end
  return
end
)");
  CompiledKernel k = device::compile_kernel(table, "uniform",
                                            {array_of(Type::int64())}, warp(4));
  DeviceState state;
  uint64_t out = state.allocate(32);
  ExecutionReport r = launch(state, k, config(1, 4),
                             pack(state, k, {dev_array(Type::int64(), out, 4)}));
  CHECK(download<int64_t>(state, out, 4) == std::vector<int64_t>{1, 1, 1, 1});
  CHECK(r.events.divergent_branches == 0);
  CHECK(r.events.max_stack_depth == 1);
}

TEST_CASE("loops run per-lane trip counts") {
  MethodTable table;
  table.load_source(R"(
function loops(out, count)
  i = threadIdx().x
  n = i - 1
  s = 0
  k = 0
  while k < n
    k = k + 1
    s = s + k * 10
    count[i] = count[i] + 1
  end
  out[i] = s
  return
end
)");
  Type arr = array_of(Type::int64());
  CompiledKernel k = device::compile_kernel(table, "loops", {arr, arr}, warp(4));
  DeviceState state;
  uint64_t out = state.allocate(32), count = state.allocate(32);
  launch(state, k, config(1, 4),
         pack(state, k, {dev_array(Type::int64(), out, 4),
                         dev_array(Type::int64(), count, 4)}));
  std::vector<int64_t> want_out, want_count;
  for (int64_t lane = 0; lane < 4; ++lane) {
    int64_t s = 0, trips = 0;
    for (int64_t j = 1; j <= lane; ++j, ++trips) s += j * 10;
    want_out.push_back(s);
    want_count.push_back(trips);
  }
  CHECK(download<int64_t>(state, out, 4) == want_out);
  CHECK(download<int64_t>(state, count, 4) == want_count);
}

constexpr const char* kShuffle = R"(
function shuf(a, out, d)
  i = threadIdx().x
  out[i] = shfl_down(a[i], d)
  return
end
)";

std::vector<int32_t> run_shuffle(int64_t delta, int64_t threads,
                                 ExecutionReport* report = nullptr) {
  MethodTable table;
  table.load_source(kShuffle);
  Type arr = array_of(Type::int32());
  CompiledKernel k = device::compile_kernel(table, "shuf", {arr, arr, Type::int64()});
  DeviceState state;
  std::vector<int32_t> lanes;
  for (int32_t i = 1; i <= threads; ++i) lanes.push_back(i);
  uint64_t a = upload(state, lanes), out = state.allocate(threads * 4);
  auto params = pack(state, k, {dev_array(Type::int32(), a, threads),
                                dev_array(Type::int32(), out, threads),
                                host_value(Value::of_i64(delta))});
  ExecutionReport r = launch(state, k, config(1, threads), params);
  if (report) *report = r;
  return download<int32_t>(state, out, threads);
}

TEST_CASE("shfl_down moves words down the warp") {
  ExecutionReport r;
  std::vector<int32_t> got = run_shuffle(16, 32, &r);
  for (int lane = 0; lane < 32; ++lane) {
    int src = lane + 16;
    CHECK(got[lane] == (src < 32 ? src + 1 : lane + 1));
  }
  CHECK(got[0] == 17);
  CHECK(r.events.shuffles == 1);

  std::vector<int32_t> same = run_shuffle(0, 32);
  for (int lane = 0; lane < 32; ++lane) CHECK(same[lane] == lane + 1);

  // A partial warp: lanes past the thread count contribute 0.
  std::vector<int32_t> partial = run_shuffle(4, 10);
  for (int lane = 0; lane < 10; ++lane) {
    CHECK(partial[lane] == (lane + 4 < 10 ? lane + 5 : 0));
  }

  CHECK_THROWS_AS(run_shuffle(32, 32), Error);
  CHECK_THROWS_AS(run_shuffle(-1, 32), Error);
}

TEST_CASE("a 128-bit record shuffles as four words") {
  MethodTable table;
  table.load_source(R"(
record Point
  x
  y
end
function shuf(a, out)
  i = threadIdx().x
  p = Point(a[i], a[i] * 2)
  q = shfl_down(p, 1)
  out[i] = q.x + q.y
  return
end
)");
  Type arr = array_of(Type::int64());
  CompiledKernel k = device::compile_kernel(table, "shuf", {arr, arr});
  DeviceState state;
  std::vector<int64_t> in;
  for (int64_t i = 0; i < 32; ++i) in.push_back(int64_t{1} << 33 | i);
  uint64_t a = upload(state, in), out = state.allocate(256);
  ExecutionReport r = launch(state, k, config(1, 32),
                             pack(state, k, {dev_array(Type::int64(), a, 32),
                                             dev_array(Type::int64(), out, 32)}));
  CHECK(r.events.shuffles == 4);
  std::vector<int64_t> got = download<int64_t>(state, out, 32);
  for (int lane = 0; lane < 32; ++lane) {
    int64_t v = in[lane + 1 < 32 ? lane + 1 : lane];
    CHECK(got[lane] == 3 * v);
  }
}

// A kernel of `load tag` through a generic or global pointer.
CompiledKernel one_load(AddressSpace tag, uint64_t offset) {
  CompiledKernel k;
  k.name = "probe";
  lir::Function fn = lir::new_function("probe", {}, lir::LirType::void_(), lir::kAttrKernel);
  lir::IrBuilder b(fn);
  lir::ValueId p = b.const_bits(lir::LirType::ptr(AddressSpace::kGlobal), offset);
  if (tag == AddressSpace::kGeneric) p = b.cast(p, AddressSpace::kGeneric);
  b.load(lir::LirType::i64(), p, tag);
  b.ret();
  k.module.functions.push_back(std::move(fn));
  k.module.entry = "probe";
  return k;
}

TEST_CASE("a generic load costs exactly the surcharge more") {
  DeviceState state;
  uint64_t off = state.allocate(8);
  ExecutionReport generic = launch(state, one_load(AddressSpace::kGeneric, off), config(1, 1), {});
  ExecutionReport global = launch(state, one_load(AddressSpace::kGlobal, off), config(1, 1), {});
  // The generic variant also pays one arithmetic cycle for the cast.
  CHECK(generic.cycles - global.cycles ==
        state.costs().generic_surcharge + state.costs().arithmetic);
  CHECK(generic.events.loads[kGeneric] == 1);
  CHECK(global.events.loads[kGlobal] == 1);

  CostTable costs;
  costs.generic_surcharge = 7;
  state.set_costs(costs);
  ExecutionReport g7 = launch(state, one_load(AddressSpace::kGeneric, off), config(1, 1), {});
  CHECK(g7.cycles - global.cycles == 7 + costs.arithmetic);
}

TEST_CASE("address-space inference lowers vadd cycles by the surcharge") {
  DeviceTargetConfig off;
  off.infer_address_spaces = false;
  Vadd pre(100, off);
  Vadd post(100);
  ExecutionReport r0 = launch(pre.state, pre.kernel, config(1, 100), pre.params);
  ExecutionReport r1 = launch(post.state, post.kernel, config(1, 100), post.params);
  CHECK(r1.cycles < r0.cycles);
  CHECK(r0.events.warp_memory_ops[kGeneric] > 0);
  CHECK(r1.events.warp_memory_ops[kGeneric] == 0);
  // Only tags differ, so the gap is the surcharge on each generic warp op.
  CHECK(r0.cycles - r1.cycles ==
        post.state.costs().generic_surcharge * r0.events.warp_memory_ops[kGeneric]);
  CHECK(download<float>(pre.state, pre.c, 100) == download<float>(post.state, post.c, 100));
}

TEST_CASE("arithmetic-only kernels cost the same under both pipelines") {
  MethodTable table;
  table.load_source(R"(
function arith(x)
  y = x * 3 + 1
  while y > 10
    y = y - 7
  end
  return
end
)");
  DeviceTargetConfig off;
  off.infer_address_spaces = false;
  CompiledKernel a = device::compile_kernel(table, "arith", {Type::int64()});
  CompiledKernel b = device::compile_kernel(table, "arith", {Type::int64()}, off);
  DeviceState state;
  auto pa = pack(state, a, {host_value(Value::of_i64(40))});
  auto pb = pack(state, b, {host_value(Value::of_i64(40))});
  CHECK(launch(state, a, config(2, 8), pa).cycles ==
        launch(state, b, config(2, 8), pb).cycles);
}

TEST_CASE("launches are deterministic") {
  Vadd one(300, {}, 7), two(300, {}, 7);
  ExecutionReport r1 = launch(one.state, one.kernel, config(3, 100), one.params);
  ExecutionReport r2 = launch(two.state, two.kernel, config(3, 100), two.params);
  CHECK(r1.to_json().dump() == r2.to_json().dump());
  CHECK(one.state.read(one.c, 1200) == two.state.read(two.c, 1200));
  CHECK(one.state.lifetime_cycles() == two.state.lifetime_cycles());
}

TEST_CASE("barriers order shared memory between warps") {
  MethodTable table;
  table.load_source(R"(
function reverse(a)
  t = shared_array(Int64(0), 64)
  i = threadIdx().x
  t[i] = a[i]
  sync_threads()
  a[i] = t[65 - i]
  return
end
)");
  CompiledKernel k = device::compile_kernel(table, "reverse",
                                            {array_of(Type::int64())}, warp(8));
  DeviceState state;
  std::vector<int64_t> in(64);
  for (int i = 0; i < 64; ++i) in[i] = i * i;
  uint64_t a = upload(state, in);
  ExecutionReport r = launch(state, k, config(1, 64),
                             pack(state, k, {dev_array(Type::int64(), a, 64)}));
  std::vector<int64_t> got = download<int64_t>(state, a, 64);
  for (int i = 0; i < 64; ++i) CHECK(got[i] == in[63 - i]);
  CHECK(r.events.barriers == 8);
}

TEST_CASE("barrier divergence is reported") {
  auto run = [](const char* body, int64_t threads) {
    MethodTable table;
    table.load_source(body);
    CompiledKernel k = device::compile_kernel(table, "k", {Type::int64()}, warp(4));
    DeviceState state;
    auto params = pack(state, k, {host_value(Value::of_i64(0))});
    try {
      launch(state, k, config(1, threads), params);
    } catch (const Error& e) {
      return std::string(e.message());
    }
    return std::string("no error");
  };
  // Part of one warp.
  std::string partial = run(R"(
function k(x)
  if threadIdx().x <= 2
    sync_threads()
  end
end
)", 4);
  CHECK(partial.find("barrier divergence") != std::string::npos);
  // Whole warps at different barrier sites.
  std::string sites = run(R"(
function k(x)
  if threadIdx().x <= 4
    sync_threads()
  else
    sync_threads()
  end
end
)", 8);
  CHECK(sites.find("barrier divergence") != std::string::npos);
  // One warp skips the barrier entirely.
  std::string skipped = run(R"(
function k(x)
  if threadIdx().x <= 4
    sync_threads()
  end
end
)", 8);
  CHECK(skipped.find("barrier divergence") != std::string::npos);
  CHECK(run(R"(
function k(x)
  if x > 0
    sync_threads()
  end
  sync_threads()
end
)", 8) == "no error");
}

TEST_CASE("faults name the address and space") {
  DeviceState state;
  try {
    launch(state, one_load(AddressSpace::kGlobal, 1 << 20), config(1, 1), {});
    FAIL("expected a fault");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kMemory);
    CHECK(e.message().find("0x100000") != std::string::npos);
  }
}

TEST_CASE("launch configurations are validated") {
  Vadd v(4);
  CHECK_THROWS_AS(launch(v.state, v.kernel, config(0, 4), v.params), Error);
  CHECK_THROWS_AS(launch(v.state, v.kernel, config(1, 1025), v.params), Error);
  LaunchConfig big = config(1, 4);
  big.shared_bytes = 64 * 1024;
  CHECK_THROWS_AS(launch(v.state, v.kernel, big, v.params), Error);
  std::vector<uint8_t> short_params(8);
  CHECK_THROWS_AS(launch(v.state, v.kernel, config(1, 4), short_params), Error);
}

TEST_CASE("cost tables round-trip through JSON") {
  CostTable c;
  c.global = 33;
  CostTable back = CostTable::from_json(c.to_json());
  CHECK(back.global == 33);
  CHECK(back.generic_surcharge == c.generic_surcharge);
  CHECK_THROWS_AS(CostTable::from_json(nlohmann::json{{"bogus", 1}}), Error);
  CHECK_THROWS_AS(CostTable::from_json(nlohmann::json{{"global", -1}}), Error);
}

TEST_CASE("random kernels agree with the reference interpreter") {
  constexpr int64_t kThreads = 37;
  constexpr int64_t kBlocks = 2;
  int checked = 0;
  for (int width : {4, 32}) {
    for (uint64_t seed = 1; seed <= 100; ++seed) {
      testing::ProgramGen gen(seed * 1000 + width);
      std::string src = gen.kernel();
      CAPTURE(src);
      MethodTable table;
      table.load_source(src);
      Type arr = array_of(Type::int64());
      CompiledKernel k = device::compile_kernel(table, "rnd", {arr, arr}, warp(width));

      std::mt19937_64 rng(seed);
      std::vector<int64_t> in(kThreads * kBlocks);
      for (auto& v : in) v = static_cast<int64_t>(rng() % 41) - 20;
      DeviceState state;
      uint64_t a = upload(state, in), out = state.allocate(in.size() * 8);
      auto params = pack(state, k, {dev_array(Type::int64(), a, in.size()),
                                    dev_array(Type::int64(), out, in.size())});
      ExecutionReport r = launch(state, k, config(kBlocks, kThreads), params);
      REQUIRE(!r.trapped());

      Value ra = array_from(in);
      Value ro = array_from(std::vector<int64_t>(in.size()));
      device::run_reference_grid(table, "rnd", {ra, ro}, {kBlocks, 1, 1},
                                 {kThreads, 1, 1}, device::DeviceTarget(warp(width)));
      CHECK(download<int64_t>(state, out, in.size()) == array_to<int64_t>(ro));
      ++checked;
    }
  }
  CHECK(checked == 200);
}

}  // namespace
}  // namespace kf::vm
