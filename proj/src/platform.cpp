#include "hetmem/platform.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>

#include "json.hpp"

namespace hetmem {

using nlohmann::json;

namespace {

// Device regions start as a fixed non-zero pattern: a read that should have
// been preceded by a transfer produces deterministically wrong numbers
// instead of accidentally-correct zeros.
constexpr std::byte kDeviceFillPattern{0x5a};

class WallTimer {
 public:
  explicit WallTimer(double& sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~WallTimer() {
    const auto end = std::chrono::steady_clock::now();
    sink_ += std::chrono::duration<double, std::nano>(end - start_).count();
  }

 private:
  double& sink_;
  std::chrono::steady_clock::time_point start_;
};

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  raise(ErrorCode::ConfigError, path + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(path + "." + key, "missing field");
  return *it;
}

double need_number(const json& j, const char* key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number()) config_fail(path + "." + key, "expected a number");
  return v.get<double>();
}

uint64_t need_unsigned(const json& j, const char* key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number_unsigned()) config_fail(path + "." + key, "expected a non-negative integer");
  return v.get<uint64_t>();
}

std::string need_string(const json& j, const char* key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_string()) config_fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

}  // namespace

const char* to_string(Kernel k) noexcept {
  switch (k) {
    case Kernel::Fft: return "fft";
    case Kernel::Ifft: return "ifft";
    case Kernel::Zip: return "zip";
    case Kernel::CpuStage: return "cpu_stage";
  }
  return "?";
}

const char* to_string(ResourceKind k) noexcept {
  switch (k) {
    case ResourceKind::Cpu: return "cpu";
    case ResourceKind::FftAcc: return "fft_acc";
    case ResourceKind::ZipAcc: return "zip_acc";
    case ResourceKind::GpuSim: return "gpu_sim";
  }
  return "?";
}

Kernel parse_kernel(std::string_view s) {
  if (s == "fft") return Kernel::Fft;
  if (s == "ifft") return Kernel::Ifft;
  if (s == "zip") return Kernel::Zip;
  if (s == "cpu_stage") return Kernel::CpuStage;
  raise(ErrorCode::ConfigError, "unknown kernel '" + std::string(s) + "'");
}

ResourceKind parse_resource_kind(std::string_view s) {
  if (s == "cpu") return ResourceKind::Cpu;
  if (s == "fft_acc") return ResourceKind::FftAcc;
  if (s == "zip_acc") return ResourceKind::ZipAcc;
  if (s == "gpu_sim") return ResourceKind::GpuSim;
  raise(ErrorCode::ConfigError, "unknown resource kind '" + std::string(s) + "'");
}

// ----- PlatformConfig ---------------------------------------------------------

PlatformConfig PlatformConfig::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
  }

  PlatformConfig cfg;
  cfg.name = doc.value("name", "unnamed");
  cfg.description = doc.value("description", "");
  cfg.alloc_cost_scale = doc.value("alloc_cost_scale", 1.0);

  const json& domains = need(doc, "domains", "config");
  if (!domains.is_array() || domains.empty()) config_fail("config.domains", "expected a non-empty array");
  for (size_t i = 0; i < domains.size(); ++i) {
    const std::string path = "domains[" + std::to_string(i) + "]";
    const json& d = domains[i];
    DomainConfig dc;
    dc.id = static_cast<DomainId>(need_unsigned(d, "id", path));
    dc.name = need_string(d, "name", path);
    dc.capacity = need_unsigned(d, "capacity", path);
    if (auto it = d.find("heap"); it != d.end()) {
      const std::string policy = need_string(*it, "policy", path + ".heap");
      if (policy == "bitset") dc.heap.policy = HeapPolicy::Bitset;
      else if (policy == "next_fit") dc.heap.policy = HeapPolicy::NextFit;
      else config_fail(path + ".heap.policy", "expected 'bitset' or 'next_fit'");
      dc.heap.block_size = it->value("block_size", uint64_t{4096});
    }
    cfg.domains.push_back(std::move(dc));
  }

  const json& resources = need(doc, "resources", "config");
  if (!resources.is_array() || resources.empty())
    config_fail("config.resources", "expected a non-empty array");
  for (size_t i = 0; i < resources.size(); ++i) {
    const std::string path = "resources[" + std::to_string(i) + "]";
    const json& r = resources[i];
    ResourceConfig rc;
    rc.id = static_cast<int>(need_unsigned(r, "id", path));
    rc.name = need_string(r, "name", path);
    rc.kind = parse_resource_kind(need_string(r, "kind", path));
    rc.domain = static_cast<DomainId>(need_unsigned(r, "domain", path));
    const json& kernels = need(r, "kernels", path);
    if (!kernels.is_array() || kernels.empty())
      config_fail(path + ".kernels", "expected a non-empty array");
    for (const auto& k : kernels) rc.kernels.push_back(parse_kernel(k.get<std::string>()));
    cfg.resources.push_back(std::move(rc));
  }

  const json& transfers = need(doc, "transfer_costs", "config");
  if (!transfers.is_array()) config_fail("config.transfer_costs", "expected an array");
  for (size_t i = 0; i < transfers.size(); ++i) {
    const std::string path = "transfer_costs[" + std::to_string(i) + "]";
    const json& t = transfers[i];
    TransferCostConfig tc;
    tc.src = static_cast<DomainId>(need_unsigned(t, "src", path));
    tc.dst = static_cast<DomainId>(need_unsigned(t, "dst", path));
    tc.latency_ns = need_number(t, "latency_ns", path);
    tc.bandwidth_bytes_per_ns = need_number(t, "bandwidth_bytes_per_ns", path);
    cfg.transfer_costs.push_back(tc);
  }

  const json& costs = need(doc, "compute_costs", "config");
  if (!costs.is_array()) config_fail("config.compute_costs", "expected an array");
  for (size_t i = 0; i < costs.size(); ++i) {
    const std::string path = "compute_costs[" + std::to_string(i) + "]";
    const json& c = costs[i];
    ComputeCostConfig cc;
    if (auto it = c.find("resource"); it != c.end()) cc.resource = it->get<std::string>();
    if (auto it = c.find("kind"); it != c.end()) cc.kind = parse_resource_kind(it->get<std::string>());
    if (!cc.resource && !cc.kind) config_fail(path, "needs 'resource' or 'kind'");
    cc.kernel = parse_kernel(need_string(c, "kernel", path));
    cc.cost.fixed_ns = need_number(c, "fixed_ns", path);
    cc.cost.per_sample_ns = need_number(c, "per_sample_ns", path);
    cfg.compute_costs.push_back(std::move(cc));
  }

  return cfg;
}

std::string PlatformConfig::to_json() const {
  json doc;
  doc["name"] = name;
  doc["description"] = description;
  doc["alloc_cost_scale"] = alloc_cost_scale;
  doc["domains"] = json::array();
  for (const auto& d : domains) {
    json jd{{"id", d.id}, {"name", d.name}, {"capacity", d.capacity}};
    if (d.heap.policy != HeapPolicy::None) {
      jd["heap"] = {{"policy", d.heap.policy == HeapPolicy::Bitset ? "bitset" : "next_fit"},
                    {"block_size", d.heap.block_size}};
    }
    doc["domains"].push_back(std::move(jd));
  }
  doc["resources"] = json::array();
  for (const auto& r : resources) {
    json jr{{"id", r.id}, {"name", r.name}, {"kind", to_string(r.kind)}, {"domain", r.domain}};
    jr["kernels"] = json::array();
    for (auto k : r.kernels) jr["kernels"].push_back(to_string(k));
    doc["resources"].push_back(std::move(jr));
  }
  doc["transfer_costs"] = json::array();
  for (const auto& t : transfer_costs)
    doc["transfer_costs"].push_back({{"src", t.src},
                                     {"dst", t.dst},
                                     {"latency_ns", t.latency_ns},
                                     {"bandwidth_bytes_per_ns", t.bandwidth_bytes_per_ns}});
  doc["compute_costs"] = json::array();
  for (const auto& c : compute_costs) {
    json jc{{"kernel", to_string(c.kernel)},
            {"fixed_ns", c.cost.fixed_ns},
            {"per_sample_ns", c.cost.per_sample_ns}};
    if (c.resource) jc["resource"] = *c.resource;
    if (c.kind) jc["kind"] = to_string(*c.kind);
    doc["compute_costs"].push_back(std::move(jc));
  }
  return doc.dump(2);
}

PlatformConfig PlatformConfig::with_heap_policy(HeapPolicy policy, uint64_t block_size) const {
  PlatformConfig out = *this;
  for (auto& d : out.domains) {
    if (d.id == kHostDomain) continue;
    d.heap.policy = policy;
    d.heap.block_size = block_size;
  }
  return out;
}

// ----- RunReport ----------------------------------------------------------------

RunReport RunReport::diff(const RunReport& earlier) const {
  RunReport d;
  d.copies_total = copies_total - earlier.copies_total;
  d.bytes_moved = bytes_moved - earlier.bytes_moved;
  for (const auto& [edge, count] : copies_by_edge) {
    uint64_t before = 0;
    if (auto it = earlier.copies_by_edge.find(edge); it != earlier.copies_by_edge.end())
      before = it->second;
    if (count > before) d.copies_by_edge[edge] = count - before;
  }
  d.hete_malloc_calls = hete_malloc_calls - earlier.hete_malloc_calls;
  d.hete_free_calls = hete_free_calls - earlier.hete_free_calls;
  d.fragment_calls = fragment_calls - earlier.fragment_calls;
  d.flag_checks = flag_checks - earlier.flag_checks;
  d.simulated_time_ns = simulated_time_ns - earlier.simulated_time_ns;
  d.wall_clock_alloc_ns = wall_clock_alloc_ns - earlier.wall_clock_alloc_ns;
  return d;
}

std::string RunReport::to_json() const {
  json doc;
  doc["copies_total"] = copies_total;
  doc["bytes_moved"] = bytes_moved;
  json edges = json::object();
  for (const auto& [edge, count] : copies_by_edge)
    edges[std::to_string(edge.first) + "->" + std::to_string(edge.second)] = count;
  doc["copies_by_edge"] = std::move(edges);
  doc["hete_malloc_calls"] = hete_malloc_calls;
  doc["hete_free_calls"] = hete_free_calls;
  doc["fragment_calls"] = fragment_calls;
  doc["flag_checks"] = flag_checks;
  doc["simulated_time_ns"] = simulated_time_ns;
  doc["wall_clock_alloc_ns"] = wall_clock_alloc_ns;
  return doc.dump(2);
}

std::string format_trace_line(const TraceEvent& ev) {
  const char* kind = "?";
  switch (ev.kind) {
    case TraceEvent::Kind::Malloc: kind = "malloc"; break;
    case TraceEvent::Kind::Free: kind = "free"; break;
    case TraceEvent::Kind::Fragment: kind = "fragment"; break;
    case TraceEvent::Kind::Check: kind = "check"; break;
    case TraceEvent::Kind::Copy: kind = "copy"; break;
    case TraceEvent::Kind::Exec: kind = "exec"; break;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%d,%llu,%.1f", kind, ev.task, ev.resource,
                ev.domain_src, ev.domain_dst, static_cast<unsigned long long>(ev.bytes),
                ev.vtime_ns);
  return buf;
}

// ----- Platform construction ---------------------------------------------------

Platform::Platform(const PlatformConfig& config) {
  name_ = config.name;
  if (config.alloc_cost_scale <= 0.0)
    config_fail("config.alloc_cost_scale", "must be positive");
  alloc_cost_scale_ = config.alloc_cost_scale;

  if (config.domains.empty()) config_fail("config.domains", "at least one domain required");
  for (size_t i = 0; i < config.domains.size(); ++i) {
    const auto& dc = config.domains[i];
    const std::string path = "domains[" + std::to_string(i) + "]";
    if (dc.id != i) config_fail(path + ".id", "domain ids must be dense and ascending from 0");
    if (dc.capacity == 0) config_fail(path + ".capacity", "must be positive");
    Domain dom;
    dom.id = dc.id;
    dom.name = dc.name;
    dom.capacity = dc.capacity;
    dom.policy = dc.heap.policy;
    if (dc.id == kHostDomain) {
      if (dc.heap.policy != HeapPolicy::None)
        config_fail(path + ".heap", "the host domain carries no sub-allocator");
    } else {
      if (dc.heap.policy == HeapPolicy::None)
        config_fail(path + ".heap", "non-host domains need a heap policy");
      try {
        if (dc.heap.policy == HeapPolicy::Bitset)
          dom.heap = std::make_unique<BitsetHeap>(dc.capacity, dc.heap.block_size);
        else
          dom.heap = std::make_unique<NextFitHeap>(dc.capacity);
      } catch (const Error& e) {
        config_fail(path + ".heap", e.what());
      }
      dom.store.assign(dc.capacity, kDeviceFillPattern);
    }
    domains_.push_back(std::move(dom));
  }

  if (config.resources.empty()) config_fail("config.resources", "at least one resource required");
  size_t cpu_count = 0;
  for (size_t i = 0; i < config.resources.size(); ++i) {
    const auto& rc = config.resources[i];
    const std::string path = "resources[" + std::to_string(i) + "]";
    if (rc.id != static_cast<int>(i))
      config_fail(path + ".id", "resource ids must be dense and ascending from 0");
    if (rc.domain >= domains_.size()) config_fail(path + ".domain", "unknown domain");
    if (rc.kind == ResourceKind::Cpu) {
      ++cpu_count;
      if (rc.domain != kHostDomain) config_fail(path + ".domain", "CPU resources live in the host domain");
    }
    Resource res;
    res.id = rc.id;
    res.name = rc.name;
    res.kind = rc.kind;
    res.domain = rc.domain;
    for (Kernel k : rc.kernels) {
      const ComputeCostConfig* chosen = nullptr;
      for (const auto& cc : config.compute_costs) {
        if (cc.kernel != k) continue;
        if (cc.resource && *cc.resource == rc.name) {
          chosen = &cc;
          break;  // exact resource match wins
        }
        if (!chosen && cc.kind && *cc.kind == rc.kind) chosen = &cc;
      }
      if (!chosen)
        config_fail(path, std::string("no compute cost for kernel '") + to_string(k) + "'");
      res.costs[k] = chosen->cost;
    }
    resources_.push_back(std::move(res));
  }
  if (cpu_count == 0) config_fail("config.resources", "at least one CPU resource required");

  for (size_t i = 0; i < config.transfer_costs.size(); ++i) {
    const auto& tc = config.transfer_costs[i];
    const std::string path = "transfer_costs[" + std::to_string(i) + "]";
    if (tc.src >= domains_.size() || tc.dst >= domains_.size())
      config_fail(path, "unknown domain");
    if (tc.src == tc.dst) config_fail(path, "same-domain transfers are never issued");
    if (tc.bandwidth_bytes_per_ns <= 0.0) config_fail(path + ".bandwidth_bytes_per_ns", "must be positive");
    if (tc.latency_ns < 0.0) config_fail(path + ".latency_ns", "must be non-negative");
    if (!transfer_costs_.emplace(std::make_pair(tc.src, tc.dst), tc).second)
      config_fail(path, "duplicate (src, dst) entry");
  }
  for (DomainId a = 0; a < domains_.size(); ++a)
    for (DomainId b = 0; b < domains_.size(); ++b)
      if (a != b && !transfer_costs_.count({a, b}))
        config_fail("config.transfer_costs", "missing entry for pair (" + std::to_string(a) +
                                                 ", " + std::to_string(b) + ")");

  records_.reserve(4096);
}

Platform Platform::from_preset(std::string_view name) {
  return Platform(PlatformConfig::from_json(preset_json(name)));
}

Platform Platform::from_json(std::string_view json_text) {
  return Platform(PlatformConfig::from_json(json_text));
}

// ----- record helpers ----------------------------------------------------------

Platform::Record& Platform::record(uint64_t id) {
  auto it = records_.find(id);
  if (it == records_.end()) raise(ErrorCode::InvalidHandle, "unknown handle " + std::to_string(id));
  return it->second;
}

const Platform::Record& Platform::record(uint64_t id) const {
  auto it = records_.find(id);
  if (it == records_.end()) raise(ErrorCode::InvalidHandle, "unknown handle " + std::to_string(id));
  return it->second;
}

Platform::Record& Platform::live_record(DataHandle h) {
  Record& r = record(h.id);
  if (!r.alive) raise(ErrorCode::InvalidHandle, "handle " + std::to_string(h.id) + " was freed");
  return r;
}

const Platform::Record& Platform::live_record(DataHandle h) const {
  const Record& r = record(h.id);
  if (!r.alive) raise(ErrorCode::InvalidHandle, "handle " + std::to_string(h.id) + " was freed");
  return r;
}

const Platform::Record& Platform::root_of(const Record& r) const {
  return r.parent == 0 ? r : record(r.parent);
}

void Platform::trace(TraceEvent ev) {
  if (trace_enabled_) {
    ev.vtime_ns = report_.simulated_time_ns;
    trace_.push_back(ev);
  }
}

// ----- data handle operations ----------------------------------------------------

DataHandle Platform::hete_malloc(uint64_t size) {
  std::lock_guard lock(mutex_);
  WallTimer timer(report_.wall_clock_alloc_ns);
  if (size == 0) raise(ErrorCode::InvalidArgument, "zero-size allocation");

  Record r;
  r.id = next_id_++;
  r.size = size;
  r.host_buffer.assign(size, std::byte{0});
  r.device_offsets.reserve(domains_.size() - 1);

  // Eager allocation in every non-host domain; on exhaustion roll back the
  // domains already charged so the failed call leaves no residue.
  size_t done = 0;
  try {
    for (size_t d = 1; d < domains_.size(); ++d) {
      r.device_offsets.push_back(domains_[d].heap->alloc(size));
      domains_[d].heap_alloc_calls += 1;
      ++done;
    }
  } catch (const Error&) {
    for (size_t d = 1; d <= done; ++d) {
      domains_[d].heap->free(r.device_offsets[d - 1], size);
      domains_[d].heap_free_calls += 1;
    }
    throw;
  }

  report_.hete_malloc_calls += 1;
  trace({TraceEvent::Kind::Malloc, -1, -1, -1, -1, size, 0.0});
  const uint64_t id = r.id;
  records_.emplace(id, std::move(r));
  return DataHandle{id};
}

void Platform::hete_free(DataHandle h) {
  std::lock_guard lock(mutex_);
  WallTimer timer(report_.wall_clock_alloc_ns);
  Record& r = record(h.id);
  if (!r.alive) raise(ErrorCode::DoubleFree, "handle " + std::to_string(h.id) + " already freed");
  if (r.parent != 0)
    raise(ErrorCode::InvalidFree, "fragment children own no storage; free the root handle");

  for (size_t d = 1; d < domains_.size(); ++d) {
    domains_[d].heap->free(r.device_offsets[d - 1], r.size);
    domains_[d].heap_free_calls += 1;
  }
  for (uint64_t child : r.children) record(child).alive = false;
  r.alive = false;
  r.host_buffer.clear();
  r.host_buffer.shrink_to_fit();

  report_.hete_free_calls += 1;
  trace({TraceEvent::Kind::Free, -1, -1, -1, -1, r.size, 0.0});
}

void Platform::hete_sync_locked(uint64_t id) {
  Record& r = record(id);
  if (r.fragmented) {
    for (uint64_t child : r.children) hete_sync_locked(child);
    return;
  }
  if (r.last_flag == kHostDomain) return;  // host already owns the data
  transfer_locked(r, r.last_flag, kHostDomain, -1);
  r.last_flag = kHostDomain;
}

void Platform::hete_sync(DataHandle h) {
  std::lock_guard lock(mutex_);
  live_record(h);
  hete_sync_locked(h.id);
}

std::vector<DataHandle> Platform::fragment(DataHandle h, uint32_t count) {
  std::lock_guard lock(mutex_);
  WallTimer timer(report_.wall_clock_alloc_ns);
  Record& r = live_record(h);
  if (count == 0) raise(ErrorCode::InvalidFragment, "fragment count must be positive");
  if (r.parent != 0) raise(ErrorCode::InvalidFragment, "cannot fragment a fragment child");
  if (r.fragmented) raise(ErrorCode::InvalidFragment, "handle is already fragmented");
  if (r.size % count != 0)
    raise(ErrorCode::InvalidFragment, "size " + std::to_string(r.size) +
                                          " not divisible into " + std::to_string(count));

  const uint64_t piece = r.size / count;
  const DomainId flag = r.last_flag;
  std::vector<DataHandle> out;
  out.reserve(count);
  r.children.reserve(count);
  for (uint32_t i = 0; i < count; ++i) {
    Record child;
    child.id = next_id_++;
    child.size = piece;
    child.parent = r.id;
    child.frag_index = i;
    child.parent_offset = static_cast<uint64_t>(i) * piece;
    child.last_flag = flag;
    const uint64_t id = child.id;
    records_.emplace(id, std::move(child));
    r.children.push_back(id);
    out.push_back(DataHandle{id});
  }
  r.fragmented = true;

  report_.fragment_calls += 1;
  trace({TraceEvent::Kind::Fragment, -1, -1, -1, -1, count, 0.0});
  return out;
}

DataHandle Platform::fragment_child(DataHandle h, uint32_t index) const {
  std::lock_guard lock(mutex_);
  const Record& r = live_record(h);
  if (!r.fragmented) raise(ErrorCode::InvalidFragment, "handle has no fragments");
  if (index >= r.children.size())
    raise(ErrorCode::IndexOutOfRange, "fragment index " + std::to_string(index) + " of " +
                                          std::to_string(r.children.size()));
  return DataHandle{r.children[index]};
}

uint32_t Platform::fragment_count(DataHandle h) const {
  std::lock_guard lock(mutex_);
  return static_cast<uint32_t>(live_record(h).children.size());
}

void Platform::mark_host_write(DataHandle h) {
  std::lock_guard lock(mutex_);
  Record& r = live_record(h);
  if (r.fragmented) {
    for (uint64_t child : r.children) record(child).last_flag = kHostDomain;
    return;
  }
  r.last_flag = kHostDomain;
}

DomainId Platform::check_flag(DataHandle h, DomainId target_domain, int task) {
  std::lock_guard lock(mutex_);
  const Record& r = live_record(h);
  if (r.fragmented)
    raise(ErrorCode::InvalidArgument,
          "a fragmented handle's flag is inert; dispatch its children instead");
  report_.flag_checks += 1;
  trace({TraceEvent::Kind::Check, task, -1, r.last_flag, target_domain, r.size, 0.0});
  return r.last_flag;
}

void Platform::set_flag(DataHandle h, DomainId d) {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  live_record(h).last_flag = d;
}

void Platform::write_host(DataHandle h, std::span<const std::byte> bytes) {
  std::lock_guard lock(mutex_);
  Record& r = live_record(h);
  if (bytes.size() != r.size)
    raise(ErrorCode::LengthMismatch, "write_host span must cover the full extent");
  auto dst = buffer_bytes_locked(r, kHostDomain);
  std::memcpy(dst.data(), bytes.data(), bytes.size());
  if (r.fragmented) {
    for (uint64_t child : r.children) record(child).last_flag = kHostDomain;
  } else {
    r.last_flag = kHostDomain;
  }
}

std::vector<std::byte> Platform::read_host(DataHandle h) const {
  std::lock_guard lock(mutex_);
  const Record& r = live_record(h);
  if (r.fragmented) {
    for (uint64_t child : r.children)
      if (record(child).last_flag != kHostDomain)
        raise(ErrorCode::InvalidArgument, "host copy is stale; hete_sync first");
  } else if (r.last_flag != kHostDomain) {
    raise(ErrorCode::InvalidArgument, "host copy is stale; hete_sync first");
  }
  auto src = const_cast<Platform*>(this)->buffer_bytes_locked(r, kHostDomain);
  return {src.begin(), src.end()};
}

uint64_t Platform::data_size(DataHandle h) const {
  std::lock_guard lock(mutex_);
  return live_record(h).size;
}

DomainId Platform::last_domain(DataHandle h) const {
  std::lock_guard lock(mutex_);
  return live_record(h).last_flag;
}

bool Platform::is_fragment(DataHandle h) const {
  std::lock_guard lock(mutex_);
  return live_record(h).parent != 0;
}

bool Platform::is_fragmented_root(DataHandle h) const {
  std::lock_guard lock(mutex_);
  return live_record(h).fragmented;
}

// ----- simulation primitives -----------------------------------------------------

std::span<std::byte> Platform::buffer_bytes_locked(const Record& r, DomainId domain) {
  if (domain >= domains_.size())
    raise(ErrorCode::UnknownDomain, "domain " + std::to_string(domain));
  const Record& root = root_of(r);
  if (domain == kHostDomain) {
    auto& buf = const_cast<Record&>(root).host_buffer;
    return {buf.data() + r.parent_offset, r.size};
  }
  const uint64_t offset = root.device_offsets[domain - 1] + r.parent_offset;
  return {domains_[domain].store.data() + offset, r.size};
}

std::span<std::byte> Platform::buffer_bytes(DataHandle h, DomainId domain) {
  std::lock_guard lock(mutex_);
  return buffer_bytes_locked(live_record(h), domain);
}

std::span<const std::byte> Platform::buffer_bytes(DataHandle h, DomainId domain) const {
  auto span = const_cast<Platform*>(this)->buffer_bytes(h, domain);
  return {span.data(), span.size()};
}

double Platform::transfer_cost_ns(DomainId src, DomainId dst, uint64_t bytes) const {
  auto it = transfer_costs_.find({src, dst});
  if (it == transfer_costs_.end())
    raise(ErrorCode::UnknownDomain,
          "no transfer cost for (" + std::to_string(src) + ", " + std::to_string(dst) + ")");
  return it->second.latency_ns + static_cast<double>(bytes) / it->second.bandwidth_bytes_per_ns;
}

void Platform::transfer_locked(Record& r, DomainId src, DomainId dst, int task) {
  if (src == dst) raise(ErrorCode::InvalidArgument, "same-domain transfer is never issued");
  auto from = buffer_bytes_locked(r, src);
  auto to = buffer_bytes_locked(r, dst);
  std::memcpy(to.data(), from.data(), r.size);

  report_.copies_total += 1;
  report_.bytes_moved += r.size;
  report_.copies_by_edge[{src, dst}] += 1;
  report_.simulated_time_ns += transfer_cost_ns(src, dst, r.size);
  trace({TraceEvent::Kind::Copy, task, -1, src, dst, r.size, 0.0});
}

void Platform::transfer(DataHandle h, DomainId src, DomainId dst, int task) {
  std::lock_guard lock(mutex_);
  Record& r = live_record(h);
  if (src >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(src));
  if (dst >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(dst));
  transfer_locked(r, src, dst, task);
}

const Platform::Resource& Platform::resource(int id) const {
  if (id < 0 || static_cast<size_t>(id) >= resources_.size())
    raise(ErrorCode::InvalidArgument, "unknown resource " + std::to_string(id));
  return resources_[id];
}

double Platform::kernel_cost_ns(int resource_id, Kernel k, uint64_t n) const {
  const Resource& res = resource(resource_id);
  auto it = res.costs.find(k);
  if (it == res.costs.end())
    raise(ErrorCode::UnsupportedKernel,
          res.name + " does not support " + std::string(to_string(k)));
  return it->second.fixed_ns + static_cast<double>(n) * it->second.per_sample_ns;
}

void Platform::execute_kernel(int resource_id, const ApiCall& call, int task) {
  std::lock_guard lock(mutex_);
  const Resource& res = resource(resource_id);
  if (!res.supports(call.kernel))
    raise(ErrorCode::UnsupportedKernel,
          res.name + " does not support " + std::string(to_string(call.kernel)));

  const DomainId dom = res.domain;
  auto load = [&](DataHandle h) {
    const Record& r = live_record(h);
    if (r.fragmented)
      raise(ErrorCode::InvalidArgument, "fragmented handles cannot be kernel operands");
    if (r.size % kBytesPerSample != 0)
      raise(ErrorCode::LengthMismatch, "buffer size is not a whole number of complex samples");
    std::vector<Complex> v(r.size / kBytesPerSample);
    auto bytes = buffer_bytes_locked(r, dom);
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
  };
  auto store = [&](DataHandle h, const std::vector<Complex>& v) {
    const Record& r = live_record(h);
    if (v.size() * kBytesPerSample != r.size)
      raise(ErrorCode::LengthMismatch, "kernel output extent mismatch");
    auto bytes = buffer_bytes_locked(r, dom);
    std::memcpy(bytes.data(), v.data(), bytes.size());
  };
  auto expect_sample_count = [&](DataHandle h) {
    if (live_record(h).size != call.n * kBytesPerSample)
      raise(ErrorCode::LengthMismatch, "handle size does not match the call's sample count");
  };

  switch (call.kernel) {
    case Kernel::Fft:
    case Kernel::Ifft: {
      if (call.inputs.size() != 1 || call.outputs.size() != 1)
        raise(ErrorCode::InvalidArgument, "fft takes one input and one output");
      expect_sample_count(call.inputs[0]);
      expect_sample_count(call.outputs[0]);
      auto v = load(call.inputs[0]);
      fft_radix2(v, call.kernel == Kernel::Ifft);
      store(call.outputs[0], v);
      break;
    }
    case Kernel::Zip: {
      if (call.inputs.size() != 2 || call.outputs.size() != 1)
        raise(ErrorCode::InvalidArgument, "zip takes two inputs and one output");
      expect_sample_count(call.inputs[0]);
      expect_sample_count(call.inputs[1]);
      expect_sample_count(call.outputs[0]);
      auto a = load(call.inputs[0]);
      auto b = load(call.inputs[1]);
      std::vector<Complex> out(a.size());
      zip_pointwise(a, b, out);
      store(call.outputs[0], out);
      break;
    }
    case Kernel::CpuStage: {
      // Gather the concatenated input extent, permute (corner turn) or pass
      // through, scatter across the outputs.
      std::vector<Complex> in;
      for (DataHandle h : call.inputs) {
        auto v = load(h);
        in.insert(in.end(), v.begin(), v.end());
      }
      uint64_t out_samples = 0;
      for (DataHandle h : call.outputs) out_samples += live_record(h).size / kBytesPerSample;
      if (out_samples != in.size())
        raise(ErrorCode::LengthMismatch, "cpu_stage input and output extents differ");
      std::vector<Complex> out(in.size());
      if (call.stage_rows != 0) {
        corner_turn(in, out, call.stage_rows, call.stage_cols);
      } else {
        out = in;
      }
      size_t cursor = 0;
      for (DataHandle h : call.outputs) {
        const size_t lane = live_record(h).size / kBytesPerSample;
        store(h, {out.begin() + cursor, out.begin() + cursor + lane});
        cursor += lane;
      }
      break;
    }
  }

  report_.simulated_time_ns += kernel_cost_ns(resource_id, call.kernel, call.n);
  trace({TraceEvent::Kind::Exec, task, resource_id, dom, dom, call.n * kBytesPerSample, 0.0});
}

// ----- accounting ------------------------------------------------------------------

RunReport Platform::report() const {
  std::lock_guard lock(mutex_);
  return report_;
}

void Platform::reset_report() {
  std::lock_guard lock(mutex_);
  report_ = RunReport{};
}

double Platform::simulated_time_ns() const {
  std::lock_guard lock(mutex_);
  return report_.simulated_time_ns;
}

void Platform::enable_trace(bool on) {
  std::lock_guard lock(mutex_);
  trace_enabled_ = on;
  if (!on) trace_.clear();
}

std::vector<TraceEvent> Platform::take_trace() {
  std::lock_guard lock(mutex_);
  return std::exchange(trace_, {});
}

uint64_t Platform::domain_free_bytes(DomainId d) const {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  if (d == kHostDomain)
    raise(ErrorCode::InvalidArgument, "the host domain has no sub-allocator");
  return domains_[d].heap->free_bytes();
}

uint64_t Platform::domain_metadata_bytes(DomainId d) const {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  if (d == kHostDomain)
    raise(ErrorCode::InvalidArgument, "the host domain has no sub-allocator");
  return domains_[d].heap->metadata_footprint();
}

uint64_t Platform::domain_alloc_calls(DomainId d) const {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  return domains_[d].heap_alloc_calls;
}

uint64_t Platform::domain_free_calls(DomainId d) const {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  return domains_[d].heap_free_calls;
}

const Heap& Platform::domain_heap(DomainId d) const {
  std::lock_guard lock(mutex_);
  if (d >= domains_.size()) raise(ErrorCode::UnknownDomain, "domain " + std::to_string(d));
  if (d == kHostDomain)
    raise(ErrorCode::InvalidArgument, "the host domain has no sub-allocator");
  return *domains_[d].heap;
}

uint64_t Platform::live_handles() const {
  std::lock_guard lock(mutex_);
  uint64_t n = 0;
  for (const auto& [id, r] : records_)
    if (r.alive) ++n;
  return n;
}

}  // namespace hetmem
