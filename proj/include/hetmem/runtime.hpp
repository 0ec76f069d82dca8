#pragma once

// Task dispatch over a platform under one of two data-flow protocols:
//
//  - reference: host-centric. A task on a non-CPU resource copies every
//    input host -> domain, runs, then copies every output domain -> host,
//    so the host always holds a fresh copy.
//  - rimms: flag-driven. Each input's last-location flag is checked; a copy
//    happens only when the flag names a different domain than the executing
//    resource, and outputs are left in place with their flags updated.
//
// run_dag executes a task graph in a deterministic topological order
// (ties broken by task id) under a schedule.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hetmem/platform.hpp"

namespace hetmem {

enum class Mode { Reference, Rimms };

const char* to_string(Mode m) noexcept;
Mode parse_mode(std::string_view s);

struct Task {
  int id = 0;
  std::string label;
  ApiCall call;
};

struct Dag {
  std::vector<Task> tasks;
};

/// Task-to-resource assignment policy. Fixed maps pin every task; round
/// robin cycles over a resource pool, keeping an independent rolling index
/// per distinct candidate set so N-way parallel stages are dealt out in
/// batches across the pool.
class Schedule {
 public:
  static Schedule fixed(std::map<int, int> task_to_resource);
  static Schedule round_robin(std::vector<int> resource_pool);

  /// Resolves every task to a resource id. Throws UnschedulableTask when a
  /// task's kernel has no capable resource in reach. CpuStage tasks fall
  /// back to CPU resources when the pool has none.
  std::map<int, int> resolve(const Platform& platform, const Dag& dag) const;

 private:
  enum class Kind { FixedMap, RoundRobin };
  Kind kind_ = Kind::RoundRobin;
  std::map<int, int> task_to_resource_;
  std::vector<int> pool_;
};

/// Resource pools for the common scenario filters. "cpu_only" selects CPU
/// resources; "acc_only"/"gpu_only" select non-CPU resources; "3cpu_1gpu"
/// selects the first three CPUs plus the first non-CPU resource; "mixed"
/// selects everything.
std::vector<int> scenario_pool(const Platform& platform, std::string_view scenario);

void dispatch_rimms(Platform& platform, const ApiCall& call, int resource_id, int task = -1);
void dispatch_reference(Platform& platform, const ApiCall& call, int resource_id, int task = -1);

/// Executes the DAG and returns the platform's report snapshot (counters
/// accumulate into the platform; diff two snapshots to scope a region).
RunReport run_dag(Platform& platform, const Dag& dag, const Schedule& schedule, Mode mode);

/// Deterministic topological order with task-id tie-breaking; throws
/// CycleDetected. Exposed for tests and trace tooling.
std::vector<int> topological_order(const Dag& dag);

/// Microbenchmark of the flag-check path in isolation: mean wall-clock cost
/// per check over `iterations` checks against the given handle.
double measure_flag_check_ns(Platform& platform, DataHandle h, uint64_t iterations);

}  // namespace hetmem
