#pragma once

// Independent replay of the two data-flow protocols at the handle level:
// given the task order, the task->resource assignment, and each handle's
// starting location, predicts every copy either protocol must issue. Used
// to cross-check the runtime's counters and trace.

#include <cstdint>
#include <map>
#include <vector>

#include "hetmem/platform.hpp"
#include "hetmem/runtime.hpp"

namespace hetmem::test {

struct ExpectedCopy {
  int task;
  DomainId src;
  DomainId dst;
  uint64_t bytes;
};

struct ProtocolReplay {
  std::vector<ExpectedCopy> copies;
  uint64_t flag_checks = 0;

  uint64_t bytes_total() const {
    uint64_t sum = 0;
    for (const auto& c : copies) sum += c.bytes;
    return sum;
  }
};

// `sizes` maps handle id -> byte size; all handles are assumed host-fresh at
// the start (the driver marks inputs before each pass).
inline ProtocolReplay replay_protocol(const Platform& platform, const Dag& dag, Mode mode,
                                      const std::map<int, int>& assignment,
                                      const std::map<uint64_t, uint64_t>& sizes,
                                      bool include_final_sync,
                                      const std::vector<DataHandle>& outputs = {}) {
  ProtocolReplay result;
  std::map<uint64_t, DomainId> flag;
  for (const auto& [id, bytes] : sizes) flag[id] = kHostDomain;

  for (int task_id : topological_order(dag)) {
    const Task* task = nullptr;
    for (const auto& t : dag.tasks)
      if (t.id == task_id) task = &t;
    const DomainId dom = platform.resource(assignment.at(task_id)).domain;

    if (mode == Mode::Rimms) {
      for (DataHandle in : task->call.inputs) {
        ++result.flag_checks;
        if (flag.at(in.id) != dom) {
          result.copies.push_back({task_id, flag.at(in.id), dom, sizes.at(in.id)});
          flag[in.id] = dom;
        }
      }
      for (DataHandle out : task->call.outputs) flag[out.id] = dom;
    } else {
      if (dom != kHostDomain) {
        for (DataHandle in : task->call.inputs)
          result.copies.push_back({task_id, kHostDomain, dom, sizes.at(in.id)});
        for (DataHandle out : task->call.outputs)
          result.copies.push_back({task_id, dom, kHostDomain, sizes.at(out.id)});
      }
    }
  }

  if (include_final_sync) {
    for (DataHandle out : outputs) {
      if (flag.at(out.id) != kHostDomain) {
        result.copies.push_back({-1, flag.at(out.id), kHostDomain, sizes.at(out.id)});
        flag[out.id] = kHostDomain;
      }
    }
  }
  return result;
}

}  // namespace hetmem::test
