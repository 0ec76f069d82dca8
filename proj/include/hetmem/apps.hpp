#pragma once

// Workload builders. Each builder allocates the application's data handles
// on the platform, fills the inputs with seeded pseudorandom complex
// samples, and returns the task graph plus the handles a driver needs to
// rerun the computation region (mark inputs, run, sync outputs).

#include <cstdint>
#include <string>
#include <vector>

#include "hetmem/platform.hpp"
#include "hetmem/runtime.hpp"

namespace hetmem {

struct BuiltApp {
  std::string name;
  Dag dag;
  std::vector<DataHandle> inputs;    // marked host-written at the start of a pass
  std::vector<DataHandle> outputs;   // synced at the end of a pass
  std::vector<DataHandle> roots;     // all root handles, freed by release()
};

/// fft -> ifft over one intermediate handle.
BuiltApp build_2fft(Platform& platform, uint32_t n, uint64_t seed);

/// fft, fft -> zip -> ifft; end to end this computes the circular
/// convolution of the two inputs.
BuiltApp build_2fzf(Platform& platform, uint32_t n, uint64_t seed);

/// zip, zip -> zip.
BuiltApp build_3zip(Platform& platform, uint32_t n, uint64_t seed);

/// Radar correlator: the 2fzf flow at n = 256.
BuiltApp build_rc(Platform& platform, uint64_t seed);

/// Pulse Doppler: 2x128 parallel 128-point ffts, 128 zips, 128 iffts, a
/// CPU-only corner turn, then 128 more 128-point ffts. Eight data points,
/// each one lane-fragmented handle when `use_fragment` is set, otherwise
/// one handle per lane. `scale` divides the lane width (must divide 128).
BuiltApp build_pd(Platform& platform, uint32_t scale, bool use_fragment, uint64_t seed);

/// Synthetic aperture radar: a 512-way fft/zip/ifft phase at n = 256 (with
/// a one-task reference-spectrum fft), a CPU-only corner turn, then a
/// 256-way fft/zip/ifft phase at n = 512. `scale` divides both widths.
BuiltApp build_sar(Platform& platform, uint32_t scale, bool use_fragment, uint64_t seed);

/// Builds by name: 2fft/2fzf/3zip (uses `n`), rc/pd/sar (use scale/fragment).
BuiltApp build_app(Platform& platform, std::string_view name, uint32_t n,
                   uint32_t scale, bool use_fragment, uint64_t seed);

/// One computation-region pass: mark inputs host-written, run the DAG,
/// sync every output. Returns the report delta for the pass.
RunReport run_app_pass(Platform& platform, const BuiltApp& app, const Schedule& schedule,
                       Mode mode);

/// Frees every root handle.
void release_app(Platform& platform, const BuiltApp& app);

/// FNV-1a over the synced host bytes of the app's outputs.
uint64_t output_checksum(const Platform& platform, const BuiltApp& app);

/// Structural checks every builder result must satisfy: acyclic, every
/// handle size consistent with its tasks. Throws on violation.
void validate_dag(const Platform& platform, const Dag& dag);

}  // namespace hetmem
