#pragma once

// Experiment drivers behind the bench CLI. Each driver returns structured
// rows so the CLI can serialize them and the test suites can assert on the
// numbers directly.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hetmem/apps.hpp"
#include "hetmem/platform.hpp"
#include "hetmem/runtime.hpp"

namespace hetmem {

struct ExperimentSpec {
  std::string experiment;              // copy_sweep | alloc_overhead | flag_overhead | pd_repeat | app_run
  std::string platform = "zcu102";     // preset name or config file path
  std::string mode = "both";           // reference | rimms | both
  std::string app = "all";             // copy_sweep: 2fft|2fzf|3zip|all; app_run: rc|pd|sar
  std::string scenario;                // app_run: cpu_only|acc_only|gpu_only|3cpu_1gpu
  std::vector<uint32_t> sizes;         // sample counts (powers of two)
  std::vector<uint64_t> block_sizes;   // bitset block sizes
  std::vector<uint64_t> repeats;       // pd_repeat counts
  uint32_t scale = 1;                  // pd/sar width divisor
  bool use_fragment = true;
  uint64_t seed = 42;
  bool assert_checks = false;
  std::string out_path;
  std::string trace_path;  // app_run: line-oriented event log

  static ExperimentSpec from_json(std::string_view json_text);
  void merge_json(std::string_view json_text);  // config file under CLI overrides
  std::string to_json() const;
  uint64_t config_hash() const;  // FNV-1a over the canonical JSON
};

PlatformConfig load_platform_config(std::string_view name_or_path);

// ----- copy_sweep -----------------------------------------------------------

struct CopySweepRow {
  std::string app;
  uint32_t size = 0;
  std::string scenario;
  Mode mode = Mode::Reference;
  uint64_t copies = 0;
  uint64_t bytes_moved = 0;
  double sim_time_ns = 0.0;
  double speedup_vs_reference = 1.0;
};

std::vector<CopySweepRow> run_copy_sweep(const ExperimentSpec& spec);
void write_copy_sweep_csv(std::ostream& out, const ExperimentSpec& spec,
                          const std::vector<CopySweepRow>& rows);

// ----- alloc_overhead -------------------------------------------------------

struct AllocOverheadRow {
  std::string scheme;       // bitset | next_fit | malloc
  uint64_t block_size = 0;  // 0 where not applicable
  uint64_t elems = 0;       // problem size in float elements
  double alloc_ns = 0.0;    // median per-call cost
  double free_ns = 0.0;
};

struct PdWorkloadRow {
  std::string scheme;  // bitset | next_fit | next_fit_fragment
  double wall_ns = 0.0;
  uint64_t hete_malloc_calls = 0;
  uint64_t hete_free_calls = 0;
  uint64_t fragment_calls = 0;
  uint64_t mallocs_per_data_point = 0;
};

struct AllocOverheadResult {
  std::vector<AllocOverheadRow> size_rows;
  std::vector<PdWorkloadRow> pd_rows;
};

AllocOverheadResult run_alloc_overhead(const ExperimentSpec& spec);
void write_alloc_overhead_csv(std::ostream& out, const ExperimentSpec& spec,
                              const AllocOverheadResult& result);

// ----- flag_overhead --------------------------------------------------------

struct FlagOverheadRow {
  uint64_t handle_bytes = 0;
  uint64_t iterations = 0;
  double ns_per_check = 0.0;
};

std::vector<FlagOverheadRow> run_flag_overhead(const ExperimentSpec& spec);
void write_flag_overhead_csv(std::ostream& out, const ExperimentSpec& spec,
                             const std::vector<FlagOverheadRow>& rows);

// ----- pd_repeat ------------------------------------------------------------

struct PdRepeatRow {
  uint64_t repeats = 0;
  std::string scheme;
  double comp_ref_ns = 0.0;    // simulated, k computation passes
  double comp_rimms_ns = 0.0;
  double comp_speedup = 0.0;
  double alloc_wall_ns = 0.0;  // measured once per scheme, folded into overall
  double overall_ref_ns = 0.0;
  double overall_rimms_ns = 0.0;
  double overall_speedup = 0.0;
};

std::vector<PdRepeatRow> run_pd_repeat(const ExperimentSpec& spec);
void write_pd_repeat_csv(std::ostream& out, const ExperimentSpec& spec,
                         const std::vector<PdRepeatRow>& rows);

// ----- app_run --------------------------------------------------------------

struct AppRunResult {
  std::string app;
  std::string scenario;
  std::string platform;
  RunReport reference;
  RunReport rimms;
  uint64_t checksum_reference = 0;
  uint64_t checksum_rimms = 0;
  bool checksums_equal = false;
};

AppRunResult run_app_experiment(const ExperimentSpec& spec);
std::string app_run_json(const ExperimentSpec& spec, const AppRunResult& result);

// Assertion layer: returns a list of violated expectations (empty = pass).
std::vector<std::string> check_copy_sweep(const std::vector<CopySweepRow>& rows);
std::vector<std::string> check_alloc_overhead(const AllocOverheadResult& result);
std::vector<std::string> check_flag_overhead(const std::vector<FlagOverheadRow>& rows);
std::vector<std::string> check_pd_repeat(const std::vector<PdRepeatRow>& rows,
                                         bool assert_scheme_ordering = true);
std::vector<std::string> check_app_run(const AppRunResult& result);

}  // namespace hetmem
