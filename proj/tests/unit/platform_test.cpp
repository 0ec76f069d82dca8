#include "hetmem/platform.hpp"

#include <cstring>
#include <functional>

#include "doctest.h"
#include "support/numeric.hpp"

using namespace hetmem;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(-1);
}

// Two device domains with simple unit costs, for rollback and cost tests.
const char* kTwoDeviceConfig = R"json({
  "name": "twodev",
  "domains": [
    { "id": 0, "name": "host", "capacity": 1048576 },
    { "id": 1, "name": "devA", "capacity": 1048576, "heap": { "policy": "next_fit" } },
    { "id": 2, "name": "devB", "capacity": 16384, "heap": { "policy": "bitset", "block_size": 4096 } }
  ],
  "resources": [
    { "id": 0, "name": "cpu0", "kind": "cpu", "domain": 0, "kernels": ["fft", "ifft", "zip", "cpu_stage"] },
    { "id": 1, "name": "acc0", "kind": "fft_acc", "domain": 1, "kernels": ["fft", "ifft"] }
  ],
  "transfer_costs": [
    { "src": 0, "dst": 1, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 },
    { "src": 1, "dst": 0, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 },
    { "src": 0, "dst": 2, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 },
    { "src": 2, "dst": 0, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 },
    { "src": 1, "dst": 2, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 },
    { "src": 2, "dst": 1, "latency_ns": 1000.0, "bandwidth_bytes_per_ns": 1.0 }
  ],
  "compute_costs": [
    { "kind": "cpu", "kernel": "fft", "fixed_ns": 10.0, "per_sample_ns": 1.0 },
    { "kind": "cpu", "kernel": "ifft", "fixed_ns": 10.0, "per_sample_ns": 1.0 },
    { "kind": "cpu", "kernel": "zip", "fixed_ns": 10.0, "per_sample_ns": 1.0 },
    { "kind": "cpu", "kernel": "cpu_stage", "fixed_ns": 10.0, "per_sample_ns": 1.0 },
    { "kind": "fft_acc", "kernel": "fft", "fixed_ns": 5.0, "per_sample_ns": 0.5 },
    { "kind": "fft_acc", "kernel": "ifft", "fixed_ns": 5.0, "per_sample_ns": 0.5 }
  ]
})json";

std::vector<std::byte> to_bytes(const std::vector<Complex>& v) {
  std::vector<std::byte> out(v.size() * sizeof(Complex));
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

}  // namespace

TEST_CASE("presets parse and build") {
  for (const auto& name : preset_names()) {
    Platform p = Platform::from_preset(name);
    CHECK(p.domains().size() >= 2);
    CHECK(p.resources().size() >= 2);
  }
  CHECK(code_of([] { Platform::from_preset("zcu103"); }) == ErrorCode::ConfigError);
}

TEST_CASE("config validation reports field paths") {
  auto build = [](const std::string& text) { return Platform::from_json(text); };

  auto expect_config_error = [&](std::string mutated, const char* needle) {
    try {
      build(mutated);
      FAIL_CHECK("expected ConfigError mentioning " << needle);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  // No CPU anywhere.
  expect_config_error(R"json({
    "name": "nocpu",
    "domains": [{ "id": 0, "name": "host", "capacity": 1024 }],
    "resources": [{ "id": 0, "name": "g", "kind": "gpu_sim", "domain": 0, "kernels": ["zip"] }],
    "transfer_costs": [],
    "compute_costs": [{ "kind": "gpu_sim", "kernel": "zip", "fixed_ns": 1.0, "per_sample_ns": 1.0 }]
  })json",
                      "CPU");

  std::string base = kTwoDeviceConfig;

  expect_config_error(
      [&] {
        std::string s = base;
        const auto pos = s.find("{ \"src\": 1, \"dst\": 2,");
        s.erase(pos, s.find("}", pos) - pos + 2);
        return s;
      }(),
      "transfer_costs");

  expect_config_error(
      [&] {
        std::string s = base;
        const auto pos = s.find("\"capacity\": 16384");
        s.replace(pos, 17, "\"capacity\": 16383");
        return s;
      }(),
      "heap");  // bitset block size must divide capacity

  expect_config_error(
      [&] {
        std::string s = base;
        const auto pos = s.find("\"id\": 2, \"name\": \"devB\"");
        s.replace(pos, 8, "\"id\": 7,");
        return s;
      }(),
      "id");
}

TEST_CASE("hete_malloc allocates eagerly in every non-host domain") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const uint64_t free_a = p.domain_free_bytes(1);
  const uint64_t free_b = p.domain_free_bytes(2);

  const DataHandle h = p.hete_malloc(1024);
  CHECK(p.last_domain(h) == kHostDomain);
  CHECK(p.data_size(h) == 1024);
  CHECK(p.domain_free_bytes(1) == free_a - 1024);
  CHECK(p.domain_free_bytes(2) == free_b - 4096);  // rounded to one block
  CHECK(p.report().hete_malloc_calls == 1);

  // Host buffer arrives zeroed.
  for (std::byte b : p.read_host(h)) CHECK(b == std::byte{0});
}

TEST_CASE("consecutive next-fit mallocs are adjacent") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  p.hete_malloc(512);
  p.hete_malloc(512);
  const auto& heap = dynamic_cast<const NextFitHeap&>(p.domain_heap(1));
  const auto segs = heap.segments();
  REQUIRE(segs.size() >= 2);
  CHECK(segs[0].offset == 0);
  CHECK(segs[0].size == 512);
  CHECK(segs[0].used);
  CHECK(segs[1].offset == 512);
  CHECK(segs[1].size == 512);
  CHECK(segs[1].used);
}

TEST_CASE("hete_malloc failures roll back partial allocations") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const uint64_t free_a = p.domain_free_bytes(1);
  // devB holds 16 KiB, so this exhausts it while devA could serve it.
  CHECK(code_of([&] { p.hete_malloc(32768); }) == ErrorCode::OutOfResourceMemory);
  CHECK(p.domain_free_bytes(1) == free_a);
  CHECK(p.live_handles() == 0);
  CHECK(code_of([&] { p.hete_malloc(0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("hete_free returns every domain to its prior state") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const uint64_t free_a = p.domain_free_bytes(1);
  const uint64_t free_b = p.domain_free_bytes(2);
  const auto& nf = dynamic_cast<const NextFitHeap&>(p.domain_heap(1));
  const uint64_t segs_before = nf.segment_count();

  const DataHandle h = p.hete_malloc(2048);
  p.hete_free(h);
  CHECK(p.domain_free_bytes(1) == free_a);
  CHECK(p.domain_free_bytes(2) == free_b);
  CHECK(nf.segment_count() == segs_before);

  CHECK(code_of([&] { p.hete_free(h); }) == ErrorCode::DoubleFree);
  CHECK(code_of([&] { p.hete_sync(h); }) == ErrorCode::InvalidHandle);
}

TEST_CASE("freeing a fragment child is rejected") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(4096);
  const auto children = p.fragment(h, 4);
  CHECK(code_of([&] { p.hete_free(children[0]); }) == ErrorCode::InvalidFree);
  p.hete_free(h);
  CHECK(code_of([&] { p.hete_sync(children[0]); }) == ErrorCode::InvalidHandle);
}

TEST_CASE("hete_sync copies only when the host is stale") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(4096);

  p.hete_sync(h);
  CHECK(p.report().copies_total == 0);  // host already owns it

  p.transfer(h, kHostDomain, 1);
  p.set_flag(h, 1);
  p.hete_sync(h);
  CHECK(p.report().copies_total == 2);
  CHECK(p.report().bytes_moved == 8192);
  CHECK(p.last_domain(h) == kHostDomain);

  p.hete_sync(h);  // idempotent
  CHECK(p.report().copies_total == 2);
}

TEST_CASE("transfer charges the latency plus bandwidth cost") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(1024);
  p.transfer(h, kHostDomain, 1);
  CHECK(p.simulated_time_ns() == doctest::Approx(1000.0 + 1024.0));
  p.transfer(h, 1, kHostDomain);
  CHECK(p.report().bytes_moved == 2048);
  CHECK(p.report().copies_by_edge.at({0, 1}) == 1);
  CHECK(p.report().copies_by_edge.at({1, 0}) == 1);

  CHECK(code_of([&] { p.transfer(h, 1, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { p.transfer(h, 0, 9); }) == ErrorCode::UnknownDomain);
}

TEST_CASE("transfers move real bytes between backing stores") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(64);
  std::vector<std::byte> payload(64);
  for (size_t i = 0; i < payload.size(); ++i) payload[i] = std::byte(i);
  p.write_host(h, payload);
  p.transfer(h, kHostDomain, 1);

  auto dev = p.buffer_bytes(h, 1);
  CHECK(std::memcmp(dev.data(), payload.data(), payload.size()) == 0);

  // Scribble on the device copy, sync back, and the host must see it.
  dev[0] = std::byte{0xff};
  p.set_flag(h, 1);
  p.hete_sync(h);
  CHECK(p.read_host(h)[0] == std::byte{0xff});
}

TEST_CASE("fragment children partition the parent and alias its storage") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(4 * 1024);
  const RunReport before = p.report();
  const uint64_t free_a = p.domain_free_bytes(1);

  const auto children = p.fragment(h, 4);
  REQUIRE(children.size() == 4);
  CHECK(p.fragment_count(h) == 4);
  CHECK(p.report().fragment_calls == before.fragment_calls + 1);
  CHECK(p.report().hete_malloc_calls == before.hete_malloc_calls);  // no heap traffic
  CHECK(p.domain_free_bytes(1) == free_a);

  for (uint32_t i = 0; i < 4; ++i) {
    CHECK(p.fragment_child(h, i) == children[i]);
    CHECK(p.data_size(children[i]) == 1024);
    CHECK(p.is_fragment(children[i]));
    CHECK(p.last_domain(children[i]) == kHostDomain);
  }
  CHECK(code_of([&] { p.fragment_child(h, 4); }) == ErrorCode::IndexOutOfRange);

  // Writing through child i lands at byte range [i*1024, (i+1)*1024) of the
  // parent extent.
  std::vector<std::byte> payload(1024, std::byte{0xab});
  p.write_host(children[3], payload);
  auto parent_bytes = p.buffer_bytes(h, kHostDomain);
  CHECK(parent_bytes[3 * 1024] == std::byte{0xab});
  CHECK(parent_bytes[3 * 1024 - 1] == std::byte{0});
}

TEST_CASE("fragment rejections") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(1000);
  CHECK(code_of([&] { p.fragment(h, 0); }) == ErrorCode::InvalidFragment);
  CHECK(code_of([&] { p.fragment(h, 3); }) == ErrorCode::InvalidFragment);  // 1000 % 3 != 0
  const auto children = p.fragment(h, 4);
  CHECK(code_of([&] { p.fragment(h, 4); }) == ErrorCode::InvalidFragment);  // already fragmented
  CHECK(code_of([&] { p.fragment(children[0], 5); }) == ErrorCode::InvalidFragment);
}

TEST_CASE("fragment of one child spans the whole extent") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(4096);
  const auto children = p.fragment(h, 1);
  REQUIRE(children.size() == 1);
  CHECK(p.data_size(children[0]) == 4096);
}

TEST_CASE("syncing a fragmented parent syncs each child") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(2048);
  const auto children = p.fragment(h, 2);
  p.transfer(children[0], kHostDomain, 1);
  p.set_flag(children[0], 1);
  CHECK(code_of([&] { p.read_host(h); }) == ErrorCode::InvalidArgument);  // one child stale
  p.hete_sync(h);
  CHECK(p.last_domain(children[0]) == kHostDomain);
  CHECK(p.read_host(h).size() == 2048);
}

TEST_CASE("kernels produce identical bytes on CPU and accelerator") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const auto x = test::random_signal(128, 3);

  const DataHandle in = p.hete_malloc(128 * sizeof(Complex));
  const DataHandle out_cpu = p.hete_malloc(128 * sizeof(Complex));
  const DataHandle out_acc = p.hete_malloc(128 * sizeof(Complex));
  p.write_host(in, to_bytes(x));

  ApiCall call;
  call.kernel = Kernel::Fft;
  call.n = 128;
  call.inputs = {in};

  call.outputs = {out_cpu};
  p.execute_kernel(0, call);  // cpu, reads host buffers

  p.transfer(in, kHostDomain, 1);
  call.outputs = {out_acc};
  p.execute_kernel(1, call);  // accelerator, reads domain 1
  p.transfer(out_acc, 1, kHostDomain);

  const auto a = p.read_host(out_cpu);
  const auto b = p.read_host(out_acc);
  CHECK(std::memcmp(a.data(), b.data(), a.size()) == 0);
}

TEST_CASE("execute_kernel validates support and extents") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle a = p.hete_malloc(128 * sizeof(Complex));
  const DataHandle b = p.hete_malloc(128 * sizeof(Complex));
  ApiCall zip;
  zip.kernel = Kernel::Zip;
  zip.n = 128;
  zip.inputs = {a, a};
  zip.outputs = {b};
  CHECK(code_of([&] { p.execute_kernel(1, zip); }) == ErrorCode::UnsupportedKernel);

  ApiCall fft;
  fft.kernel = Kernel::Fft;
  fft.n = 64;  // wrong: handles hold 128 samples
  fft.inputs = {a};
  fft.outputs = {b};
  CHECK(code_of([&] { p.execute_kernel(0, fft); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("report snapshots diff cleanly and trace lines are well formed") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  p.enable_trace(true);
  const DataHandle h = p.hete_malloc(1024);
  const RunReport before = p.report();
  p.transfer(h, kHostDomain, 1, 7);
  const RunReport delta = p.report().diff(before);
  CHECK(delta.copies_total == 1);
  CHECK(delta.hete_malloc_calls == 0);
  CHECK(delta.copies_by_edge.size() == 1);

  const auto events = p.take_trace();
  REQUIRE(events.size() == 2);  // malloc + copy
  CHECK(format_trace_line(events[0]).rfind("malloc,", 0) == 0);
  const std::string line = format_trace_line(events[1]);
  CHECK(line.rfind("copy,7,-1,0,1,1024,", 0) == 0);
}

TEST_CASE("read_host rejects stale reads until synced") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(256);
  p.set_flag(h, 1);
  CHECK(code_of([&] { p.read_host(h); }) == ErrorCode::InvalidArgument);
  p.mark_host_write(h);
  CHECK(p.read_host(h).size() == 256);
}

TEST_CASE("a fragmented root cannot take part in dataflow itself") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle h = p.hete_malloc(2048);
  const DataHandle out = p.hete_malloc(2048);
  p.fragment(h, 2);
  CHECK(p.is_fragmented_root(h));
  CHECK(code_of([&] { p.check_flag(h, 1); }) == ErrorCode::InvalidArgument);
  ApiCall call;
  call.kernel = Kernel::Fft;
  call.n = 256;
  call.inputs = {h};
  call.outputs = {out};
  CHECK(code_of([&] { p.execute_kernel(0, call); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("fragment partition holds for every divisor of the extent") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  for (uint32_t count : {1u, 2u, 3u, 4u, 6u, 8u, 12u, 16u, 24u, 48u}) {
    const uint64_t size = 12288;
    REQUIRE(size % count == 0);
    const DataHandle root = p.hete_malloc(size);
    const auto children = p.fragment(root, count);
    REQUIRE(children.size() == count);

    // Children are contiguous, disjoint, and cover the extent: stamping
    // child i with byte (i+1) must tile the parent exactly.
    for (uint32_t i = 0; i < count; ++i) {
      CHECK(p.data_size(children[i]) == size / count);
      std::vector<std::byte> stamp(size / count, std::byte(i + 1));
      p.write_host(children[i], stamp);
    }
    const auto parent_bytes = p.read_host(root);
    for (uint64_t b = 0; b < size; ++b)
      CHECK(parent_bytes[b] == std::byte(1 + b / (size / count)));
    p.hete_free(root);
  }
}

TEST_CASE("per-domain allocation call counters track heap traffic") {
  Platform p = Platform::from_json(kTwoDeviceConfig);
  const DataHandle a = p.hete_malloc(512);
  const DataHandle b = p.hete_malloc(512);
  CHECK(p.domain_alloc_calls(1) == 2);
  CHECK(p.domain_alloc_calls(2) == 2);
  CHECK(p.domain_free_calls(1) == 0);
  p.fragment(a, 2);  // no heap traffic
  CHECK(p.domain_alloc_calls(1) == 2);
  p.hete_free(a);
  p.hete_free(b);
  CHECK(p.domain_free_calls(1) == 2);
  CHECK(p.domain_free_calls(2) == 2);
}
