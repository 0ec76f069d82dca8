#include "hetmem/runtime.hpp"

#include <algorithm>
#include <chrono>
#include <queue>
#include <unordered_map>

namespace hetmem {

const char* to_string(Mode m) noexcept {
  return m == Mode::Reference ? "reference" : "rimms";
}

Mode parse_mode(std::string_view s) {
  if (s == "reference") return Mode::Reference;
  if (s == "rimms") return Mode::Rimms;
  raise(ErrorCode::ConfigError, "unknown mode '" + std::string(s) + "'");
}

// ----- Schedule ---------------------------------------------------------------

Schedule Schedule::fixed(std::map<int, int> task_to_resource) {
  Schedule s;
  s.kind_ = Kind::FixedMap;
  s.task_to_resource_ = std::move(task_to_resource);
  return s;
}

Schedule Schedule::round_robin(std::vector<int> resource_pool) {
  Schedule s;
  s.kind_ = Kind::RoundRobin;
  s.pool_ = std::move(resource_pool);
  return s;
}

std::map<int, int> Schedule::resolve(const Platform& platform, const Dag& dag) const {
  std::map<int, int> out;
  if (kind_ == Kind::FixedMap) {
    for (const Task& t : dag.tasks) {
      auto it = task_to_resource_.find(t.id);
      if (it == task_to_resource_.end())
        raise(ErrorCode::UnschedulableTask, "task " + std::to_string(t.id) + " has no mapping");
      const auto& res = platform.resource(it->second);
      if (!res.supports(t.call.kernel))
        raise(ErrorCode::UnschedulableTask,
              "task " + std::to_string(t.id) + " mapped to " + res.name +
                  " which does not support " + to_string(t.call.kernel));
      out[t.id] = it->second;
    }
    return out;
  }

  // Round robin: one rolling index per distinct candidate set, so each
  // N-way parallel stage is dealt out in batches across the pool.
  std::map<std::vector<int>, size_t> counters;
  std::vector<int> order;
  for (const Task& t : dag.tasks) order.push_back(t.id);
  std::sort(order.begin(), order.end());
  std::unordered_map<int, const Task*> by_id;
  for (const Task& t : dag.tasks) by_id[t.id] = &t;

  for (int id : order) {
    const Task& t = *by_id.at(id);
    std::vector<int> candidates;
    for (int rid : pool_)
      if (platform.resource(rid).supports(t.call.kernel)) candidates.push_back(rid);
    if (candidates.empty() && t.call.kernel == Kernel::CpuStage) {
      // CPU-only stages run on a CPU even under accelerator-only pools.
      for (const auto& res : platform.resources())
        if (res.kind == ResourceKind::Cpu && res.supports(Kernel::CpuStage))
          candidates.push_back(res.id);
    }
    if (candidates.empty())
      raise(ErrorCode::UnschedulableTask, "no resource in the pool supports " +
                                              std::string(to_string(t.call.kernel)) +
                                              " for task " + std::to_string(t.id));
    size_t& next = counters[candidates];
    out[id] = candidates[next % candidates.size()];
    ++next;
  }
  return out;
}

std::vector<int> scenario_pool(const Platform& platform, std::string_view scenario) {
  std::vector<int> pool;
  const auto& resources = platform.resources();
  if (scenario == "cpu_only") {
    for (const auto& r : resources)
      if (r.kind == ResourceKind::Cpu) pool.push_back(r.id);
  } else if (scenario == "acc_only" || scenario == "gpu_only") {
    for (const auto& r : resources)
      if (r.kind != ResourceKind::Cpu) pool.push_back(r.id);
  } else if (scenario == "3cpu_1gpu") {
    int cpus = 0;
    for (const auto& r : resources)
      if (r.kind == ResourceKind::Cpu && cpus < 3) {
        pool.push_back(r.id);
        ++cpus;
      }
    for (const auto& r : resources)
      if (r.kind != ResourceKind::Cpu) {
        pool.push_back(r.id);
        break;
      }
  } else if (scenario == "mixed") {
    for (const auto& r : resources) pool.push_back(r.id);
  } else {
    raise(ErrorCode::ConfigError, "unknown scenario '" + std::string(scenario) + "'");
  }
  if (pool.empty())
    raise(ErrorCode::ConfigError,
          "scenario '" + std::string(scenario) + "' selects no resources on " + platform.name());
  return pool;
}

// ----- dispatch ----------------------------------------------------------------

void dispatch_rimms(Platform& platform, const ApiCall& call, int resource_id, int task) {
  const DomainId dom = platform.resource(resource_id).domain;
  for (DataHandle in : call.inputs) {
    const DomainId flag = platform.check_flag(in, dom, task);
    if (flag != dom) {
      platform.transfer(in, flag, dom, task);
      platform.set_flag(in, dom);
    }
  }
  platform.execute_kernel(resource_id, call, task);
  for (DataHandle out : call.outputs) platform.set_flag(out, dom);
}

void dispatch_reference(Platform& platform, const ApiCall& call, int resource_id, int task) {
  const DomainId dom = platform.resource(resource_id).domain;
  if (dom == kHostDomain) {
    platform.execute_kernel(resource_id, call, task);
    return;
  }
  // Host-centric flow: stage every input in, run, copy every output back so
  // the host always holds a fresh copy. Flags never leave the host.
  for (DataHandle in : call.inputs) platform.transfer(in, kHostDomain, dom, task);
  platform.execute_kernel(resource_id, call, task);
  for (DataHandle out : call.outputs) platform.transfer(out, dom, kHostDomain, task);
}

// ----- run_dag ------------------------------------------------------------------

std::vector<int> topological_order(const Dag& dag) {
  std::unordered_map<uint64_t, int> producer;  // handle id -> task id
  for (const Task& t : dag.tasks)
    for (DataHandle out : t.call.outputs) producer[out.id] = t.id;

  std::unordered_map<int, std::vector<int>> successors;
  std::unordered_map<int, int> indegree;
  for (const Task& t : dag.tasks) indegree[t.id] = 0;
  for (const Task& t : dag.tasks) {
    for (DataHandle in : t.call.inputs) {
      auto it = producer.find(in.id);
      if (it == producer.end() || it->second == t.id) continue;
      successors[it->second].push_back(t.id);
      indegree[t.id] += 1;
    }
  }

  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);

  std::vector<int> order;
  order.reserve(dag.tasks.size());
  while (!ready.empty()) {
    const int id = ready.top();
    ready.pop();
    order.push_back(id);
    for (int succ : successors[id])
      if (--indegree[succ] == 0) ready.push(succ);
  }
  if (order.size() != dag.tasks.size())
    raise(ErrorCode::CycleDetected, "task graph contains a cycle");
  return order;
}

RunReport run_dag(Platform& platform, const Dag& dag, const Schedule& schedule, Mode mode) {
  const std::vector<int> order = topological_order(dag);
  const std::map<int, int> assignment = schedule.resolve(platform, dag);

  std::unordered_map<int, const Task*> by_id;
  for (const Task& t : dag.tasks) by_id[t.id] = &t;

  for (int id : order) {
    const Task& t = *by_id.at(id);
    const int rid = assignment.at(id);
    if (mode == Mode::Rimms)
      dispatch_rimms(platform, t.call, rid, id);
    else
      dispatch_reference(platform, t.call, rid, id);
  }
  return platform.report();
}

// ----- flag-check microbenchmark --------------------------------------------------

double measure_flag_check_ns(Platform& platform, DataHandle h, uint64_t iterations) {
  if (iterations < 1000000)
    raise(ErrorCode::InvalidArgument, "flag-check benchmark needs at least 1e6 iterations");

  const DomainId target = 1 < platform.domains().size() ? DomainId{1} : kHostDomain;
  uint64_t would_copy = 0;

  // Warmup to fault in the lookup path.
  for (uint64_t i = 0; i < 10000; ++i)
    would_copy += platform.check_flag(h, target) != target;

  const auto start = std::chrono::steady_clock::now();
  for (uint64_t i = 0; i < iterations; ++i)
    would_copy += platform.check_flag(h, target) != target;
  const auto end = std::chrono::steady_clock::now();

  // Keep the accumulated result observable so the loop cannot fold away.
  asm volatile("" : "+r"(would_copy));

  return std::chrono::duration<double, std::nano>(end - start).count() /
         static_cast<double>(iterations);
}

}  // namespace hetmem
