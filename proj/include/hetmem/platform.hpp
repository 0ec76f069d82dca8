#pragma once

// Simulated heterogeneous platform: memory domains with sub-allocated
// regions, processing resources with per-kernel cost models, a transfer
// engine with a (latency + bytes/bandwidth) cost per ordered domain pair,
// a virtual clock, and per-run accounting.
//
// Data handles created by hete_malloc get a host buffer plus one eager
// allocation in every non-host domain, and carry a last-location flag
// naming the domain that holds the freshest copy.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hetmem/errors.hpp"
#include "hetmem/heap.hpp"
#include "hetmem/kernels.hpp"

namespace hetmem {

using DomainId = uint16_t;
inline constexpr DomainId kHostDomain = 0;

enum class Kernel { Fft, Ifft, Zip, CpuStage };
enum class ResourceKind { Cpu, FftAcc, ZipAcc, GpuSim };
enum class HeapPolicy { None, Bitset, NextFit };

const char* to_string(Kernel k) noexcept;
const char* to_string(ResourceKind k) noexcept;
Kernel parse_kernel(std::string_view s);
ResourceKind parse_resource_kind(std::string_view s);

/// Opaque reference to a data handle owned by a Platform.
struct DataHandle {
  uint64_t id = 0;
  friend bool operator==(DataHandle a, DataHandle b) { return a.id == b.id; }
  friend auto operator<=>(DataHandle a, DataHandle b) { return a.id <=> b.id; }
};

struct ComputeCost {
  double fixed_ns = 0.0;
  double per_sample_ns = 0.0;
};

struct HeapConfig {
  HeapPolicy policy = HeapPolicy::None;
  uint64_t block_size = 4096;
};

struct DomainConfig {
  DomainId id = 0;
  std::string name;
  uint64_t capacity = 0;
  HeapConfig heap;
};

struct ResourceConfig {
  int id = 0;
  std::string name;
  ResourceKind kind = ResourceKind::Cpu;
  DomainId domain = kHostDomain;
  std::vector<Kernel> kernels;
};

struct TransferCostConfig {
  DomainId src = 0;
  DomainId dst = 0;
  double latency_ns = 0.0;
  double bandwidth_bytes_per_ns = 1.0;
};

struct ComputeCostConfig {
  std::optional<ResourceKind> kind;   // match by kind...
  std::optional<std::string> resource;  // ...or by resource name (wins)
  Kernel kernel = Kernel::Fft;
  ComputeCost cost;
};

struct PlatformConfig {
  std::string name;
  std::string description;
  double alloc_cost_scale = 1.0;
  std::vector<DomainConfig> domains;
  std::vector<ResourceConfig> resources;
  std::vector<TransferCostConfig> transfer_costs;
  std::vector<ComputeCostConfig> compute_costs;

  /// Parses the JSON config document; throws ConfigError naming the
  /// offending field path.
  static PlatformConfig from_json(std::string_view json_text);

  std::string to_json() const;

  /// Returns a copy with every non-host domain switched to the given heap
  /// scheme (bench helper for scheme comparisons).
  PlatformConfig with_heap_policy(HeapPolicy policy, uint64_t block_size = 4096) const;
};

/// Returns the JSON text of a named in-repo preset ("zcu102", "jetson").
std::string_view preset_json(std::string_view name);
std::vector<std::string> preset_names();

/// Per-run accounting. Counters only ever increase while a run proceeds;
/// diff() against an earlier snapshot scopes a region.
struct RunReport {
  uint64_t copies_total = 0;
  uint64_t bytes_moved = 0;
  std::map<std::pair<DomainId, DomainId>, uint64_t> copies_by_edge;
  uint64_t hete_malloc_calls = 0;
  uint64_t hete_free_calls = 0;
  uint64_t fragment_calls = 0;
  uint64_t flag_checks = 0;
  double simulated_time_ns = 0.0;
  double wall_clock_alloc_ns = 0.0;  // real time inside malloc/free/fragment calls

  RunReport diff(const RunReport& earlier) const;
  std::string to_json() const;
};

struct TraceEvent {
  enum class Kind { Malloc, Free, Fragment, Check, Copy, Exec };
  Kind kind = Kind::Copy;
  int task = -1;
  int resource = -1;
  int domain_src = -1;
  int domain_dst = -1;
  uint64_t bytes = 0;
  double vtime_ns = 0.0;
};

/// `event,task,resource,domain_src,domain_dst,bytes,vtime` line format.
std::string format_trace_line(const TraceEvent& ev);

struct ApiCall {
  Kernel kernel = Kernel::Fft;
  std::vector<DataHandle> inputs;
  std::vector<DataHandle> outputs;
  uint64_t n = 0;  // samples processed by the call (per lane for fft/zip)

  // CpuStage payload: corner turn of the concatenated input extent viewed
  // as rows x cols. rows == 0 means plain pass-through.
  uint32_t stage_rows = 0;
  uint32_t stage_cols = 0;
};

class Platform {
 public:
  struct Domain {
    DomainId id = 0;
    std::string name;
    uint64_t capacity = 0;
    HeapPolicy policy = HeapPolicy::None;
    std::unique_ptr<Heap> heap;        // null for the host domain
    std::vector<std::byte> store;      // backing bytes, null for host
    uint64_t heap_alloc_calls = 0;     // one per hete_malloc reaching this domain
    uint64_t heap_free_calls = 0;
  };

  struct Resource {
    int id = 0;
    std::string name;
    ResourceKind kind = ResourceKind::Cpu;
    DomainId domain = kHostDomain;
    std::map<Kernel, ComputeCost> costs;
    bool supports(Kernel k) const { return costs.count(k) != 0; }
  };

  explicit Platform(const PlatformConfig& config);

  static Platform from_preset(std::string_view name);
  static Platform from_json(std::string_view json_text);

  Platform(const Platform&) = delete;
  Platform& operator=(const Platform&) = delete;

  // ----- data handle operations -------------------------------------------

  /// Allocates `size` bytes: a zero-initialized host buffer plus one
  /// allocation in every non-host domain. The handle starts host-owned.
  /// Partial allocations are rolled back if any domain is exhausted.
  DataHandle hete_malloc(uint64_t size);

  /// Releases every per-domain allocation of a root handle and invalidates
  /// its fragment children.
  void hete_free(DataHandle h);

  /// Copies the handle's bytes from its last-written domain into the host
  /// buffer and marks the host as owner. No-op when the host already owns
  /// it. On a fragmented root, syncs each child.
  void hete_sync(DataHandle h);

  /// Splits a root handle into `count` equal children that alias the
  /// parent's storage at fixed offsets in every domain. No heap operation
  /// is performed; each child tracks its own location flag and the parent's
  /// flag becomes inert.
  std::vector<DataHandle> fragment(DataHandle h, uint32_t count);

  /// i-th fragment child.
  DataHandle fragment_child(DataHandle h, uint32_t index) const;
  uint32_t fragment_count(DataHandle h) const;

  /// Declares that the caller rewrote the handle's host bytes outside any
  /// API call (input acquisition); the host becomes the owner.
  void mark_host_write(DataHandle h);

  /// The protocol's per-input check: counts one flag check, traces it, and
  /// returns the handle's current location flag.
  DomainId check_flag(DataHandle h, DomainId target_domain, int task = -1);

  /// Flag update applied by the dispatcher after a transfer or for task
  /// outputs. The domain must exist.
  void set_flag(DataHandle h, DomainId d);

  /// Writes bytes through the host view (and makes the host the owner).
  /// The span must cover the full extent.
  void write_host(DataHandle h, std::span<const std::byte> bytes);

  /// Reads the host view. The host must own the data (hete_sync first).
  std::vector<std::byte> read_host(DataHandle h) const;

  uint64_t data_size(DataHandle h) const;
  DomainId last_domain(DataHandle h) const;
  bool is_fragment(DataHandle h) const;

  /// True for a root that has been fragmented; such a handle no longer
  /// takes part in dataflow itself (its children do).
  bool is_fragmented_root(DataHandle h) const;

  // ----- simulation primitives ---------------------------------------------

  /// Copies a handle's bytes between two distinct domains, charging the
  /// transfer cost model and the copy counters.
  void transfer(DataHandle h, DomainId src, DomainId dst, int task = -1);

  /// Runs a kernel on the given resource against the call's handles in the
  /// resource's domain and advances the virtual clock. Inputs are read and
  /// outputs written wherever that domain's buffers live; no implicit
  /// transfers happen here.
  void execute_kernel(int resource_id, const ApiCall& call, int task = -1);

  double transfer_cost_ns(DomainId src, DomainId dst, uint64_t bytes) const;
  double kernel_cost_ns(int resource_id, Kernel k, uint64_t n) const;

  // ----- accounting ---------------------------------------------------------

  RunReport report() const;
  void reset_report();
  double simulated_time_ns() const;
  double alloc_cost_scale() const { return alloc_cost_scale_; }

  void enable_trace(bool on);
  std::vector<TraceEvent> take_trace();

  // ----- introspection ------------------------------------------------------

  const std::string& name() const { return name_; }
  const std::vector<Domain>& domains() const { return domains_; }
  const std::vector<Resource>& resources() const { return resources_; }
  const Resource& resource(int id) const;
  uint64_t domain_free_bytes(DomainId d) const;
  uint64_t domain_metadata_bytes(DomainId d) const;
  uint64_t domain_alloc_calls(DomainId d) const;
  uint64_t domain_free_calls(DomainId d) const;
  const Heap& domain_heap(DomainId d) const;
  uint64_t live_handles() const;

  /// Resolves the byte range of `h` inside `domain` (host buffer or domain
  /// backing store). Used by the dispatcher and kernel execution.
  std::span<std::byte> buffer_bytes(DataHandle h, DomainId domain);
  std::span<const std::byte> buffer_bytes(DataHandle h, DomainId domain) const;

 private:
  struct Record {
    uint64_t id = 0;
    uint64_t size = 0;
    bool alive = true;
    bool fragmented = false;          // root whose flag is now inert
    DomainId last_flag = kHostDomain;
    uint64_t parent = 0;              // 0 = root
    uint32_t frag_index = 0;
    uint64_t parent_offset = 0;       // byte offset inside the root extent
    std::vector<uint64_t> children;   // fragment ids, root only
    std::vector<std::byte> host_buffer;          // root only
    std::vector<uint64_t> device_offsets;        // root only, index = domain id - 1
  };

  Record& record(uint64_t id);
  const Record& record(uint64_t id) const;
  const Record& live_record(DataHandle h) const;
  Record& live_record(DataHandle h);
  const Record& root_of(const Record& r) const;
  void trace(TraceEvent ev);

  void hete_sync_locked(uint64_t id);
  void transfer_locked(Record& r, DomainId src, DomainId dst, int task);
  std::span<std::byte> buffer_bytes_locked(const Record& r, DomainId domain);

  std::string name_;
  double alloc_cost_scale_ = 1.0;
  std::vector<Domain> domains_;
  std::vector<Resource> resources_;
  // cost_ns = latency + bytes / bandwidth, per ordered (src, dst) pair
  std::map<std::pair<DomainId, DomainId>, TransferCostConfig> transfer_costs_;

  uint64_t next_id_ = 1;
  std::unordered_map<uint64_t, Record> records_;

  RunReport report_;
  bool trace_enabled_ = false;
  std::vector<TraceEvent> trace_;

  mutable std::mutex mutex_;  // serializes all platform mutations
};

}  // namespace hetmem
