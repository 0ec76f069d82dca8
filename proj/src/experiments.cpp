#include "hetmem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace hetmem {

using nlohmann::json;

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double now_ns() {
  return std::chrono::duration<double, std::nano>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<uint32_t> default_sweep_sizes() { return {64, 128, 256, 512, 1024, 2048}; }

std::vector<uint64_t> default_block_sizes() {
  std::vector<uint64_t> v;
  for (uint64_t b = 8; b <= 65536; b *= 2) v.push_back(b);
  return v;
}

std::vector<uint64_t> default_elem_sizes() {
  std::vector<uint64_t> v;
  for (uint64_t e = 32; e <= 8192; e *= 2) v.push_back(e);
  return v;
}

void check(std::vector<std::string>& violations, bool ok, const std::string& what) {
  if (!ok) violations.push_back(what);
}

}  // namespace

// ----- ExperimentSpec ----------------------------------------------------------

ExperimentSpec ExperimentSpec::from_json(std::string_view json_text) {
  ExperimentSpec spec;
  spec.merge_json(json_text);
  return spec;
}

void ExperimentSpec::merge_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ConfigError, std::string("malformed experiment JSON: ") + e.what());
  }
  if (!doc.is_object()) raise(ErrorCode::ConfigError, "experiment spec must be a JSON object");
  if (doc.contains("experiment")) experiment = doc["experiment"].get<std::string>();
  if (doc.contains("platform")) platform = doc["platform"].get<std::string>();
  if (doc.contains("mode")) mode = doc["mode"].get<std::string>();
  if (doc.contains("app")) app = doc["app"].get<std::string>();
  if (doc.contains("scenario")) scenario = doc["scenario"].get<std::string>();
  if (doc.contains("sizes")) sizes = doc["sizes"].get<std::vector<uint32_t>>();
  if (doc.contains("block_sizes")) block_sizes = doc["block_sizes"].get<std::vector<uint64_t>>();
  if (doc.contains("repeats")) repeats = doc["repeats"].get<std::vector<uint64_t>>();
  if (doc.contains("scale")) scale = doc["scale"].get<uint32_t>();
  if (doc.contains("use_fragment")) use_fragment = doc["use_fragment"].get<bool>();
  if (doc.contains("seed")) seed = doc["seed"].get<uint64_t>();
  if (doc.contains("assert")) assert_checks = doc["assert"].get<bool>();
  if (doc.contains("out")) out_path = doc["out"].get<std::string>();
  if (doc.contains("trace")) trace_path = doc["trace"].get<std::string>();
}

std::string ExperimentSpec::to_json() const {
  json doc;
  doc["experiment"] = experiment;
  doc["platform"] = platform;
  doc["mode"] = mode;
  doc["app"] = app;
  doc["scenario"] = scenario;
  doc["sizes"] = sizes;
  doc["block_sizes"] = block_sizes;
  doc["repeats"] = repeats;
  doc["scale"] = scale;
  doc["use_fragment"] = use_fragment;
  doc["seed"] = seed;
  doc["assert"] = assert_checks;
  doc["out"] = out_path;
  doc["trace"] = trace_path;
  return doc.dump();
}

uint64_t ExperimentSpec::config_hash() const {
  uint64_t hash = 1469598103934665603ull;
  for (char c : to_json()) {
    hash ^= static_cast<uint8_t>(c);
    hash *= 1099511628211ull;
  }
  return hash;
}

PlatformConfig load_platform_config(std::string_view name_or_path) {
  for (const auto& name : preset_names())
    if (name == name_or_path) return PlatformConfig::from_json(preset_json(name_or_path));
  std::ifstream in{std::string(name_or_path)};
  if (!in)
    raise(ErrorCode::ConfigError,
          "platform '" + std::string(name_or_path) + "' is neither a preset nor a readable file");
  std::stringstream buf;
  buf << in.rdbuf();
  return PlatformConfig::from_json(buf.str());
}

namespace {

void write_header(std::ostream& out, const ExperimentSpec& spec) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(spec.config_hash()));
  out << "# hetmem-bench " << spec.experiment << "\n";
  out << "# config_hash=" << hash << " seed=" << spec.seed << " platform=" << spec.platform
      << "\n";
}

}  // namespace

// ----- copy_sweep ----------------------------------------------------------------

namespace {

Schedule sweep_schedule(const Platform& platform, const std::string& app,
                        const std::string& scenario) {
  if (scenario == "cpu_cpu" || scenario == "cpu_only")
    return Schedule::round_robin(scenario_pool(platform, "cpu_only"));
  if (scenario == "acc_acc" || scenario == "acc_only")
    return Schedule::round_robin(scenario_pool(platform, "acc_only"));
  if (scenario == "cpu_acc") {
    // First stage on a CPU, the offloaded stage on the first capable
    // accelerator (the 2fft CPU->ACC case).
    int cpu = -1, acc = -1;
    for (const auto& r : platform.resources()) {
      if (r.kind == ResourceKind::Cpu && cpu < 0) cpu = r.id;
      if (r.kind != ResourceKind::Cpu && acc < 0 && r.supports(Kernel::Ifft)) acc = r.id;
    }
    if (cpu < 0 || acc < 0)
      raise(ErrorCode::ConfigError, "cpu_acc scenario needs a CPU and an fft-capable accelerator");
    (void)app;
    return Schedule::fixed({{0, cpu}, {1, acc}});
  }
  raise(ErrorCode::ConfigError, "unknown sweep scenario '" + scenario + "'");
}

std::vector<std::string> sweep_scenarios(const std::string& app) {
  if (app == "2fft") return {"cpu_cpu", "cpu_acc", "acc_acc"};
  return {"cpu_only", "acc_only"};
}

}  // namespace

std::vector<CopySweepRow> run_copy_sweep(const ExperimentSpec& spec) {
  if (spec.mode != "both") parse_mode(spec.mode);  // validates the name
  const PlatformConfig cfg = load_platform_config(spec.platform);
  std::vector<std::string> apps;
  if (spec.app == "all" || spec.app.empty()) apps = {"2fft", "2fzf", "3zip"};
  else apps = {spec.app};
  for (const auto& a : apps)
    if (a != "2fft" && a != "2fzf" && a != "3zip")
      raise(ErrorCode::ConfigError, "copy_sweep app must be one of 2fft, 2fzf, 3zip");
  const std::vector<uint32_t> sizes = spec.sizes.empty() ? default_sweep_sizes() : spec.sizes;
  for (uint32_t n : sizes)
    if (n < 64 || n > 2048 || (n & (n - 1)) != 0)
      raise(ErrorCode::ConfigError, "sweep sizes must be powers of two in 64..2048");

  std::vector<CopySweepRow> rows;
  for (const auto& app_name : apps) {
    for (const auto& scenario : sweep_scenarios(app_name)) {
      for (uint32_t n : sizes) {
        double sim_ref = 0.0;
        std::vector<CopySweepRow> pair;
        for (Mode mode : {Mode::Reference, Mode::Rimms}) {
          Platform platform(cfg);
          BuiltApp app = build_app(platform, app_name, n, 1, true, spec.seed);
          const Schedule schedule = sweep_schedule(platform, app_name, scenario);
          // The counted region is the dispatch protocol itself; the final
          // host sync is measured by app_run instead.
          const RunReport before = platform.report();
          for (DataHandle h : app.inputs) platform.mark_host_write(h);
          run_dag(platform, app.dag, schedule, mode);
          const RunReport delta = platform.report().diff(before);

          CopySweepRow row;
          row.app = app_name;
          row.size = n;
          row.scenario = scenario;
          row.mode = mode;
          row.copies = delta.copies_total;
          row.bytes_moved = delta.bytes_moved;
          row.sim_time_ns = delta.simulated_time_ns;
          if (mode == Mode::Reference) sim_ref = delta.simulated_time_ns;
          row.speedup_vs_reference =
              mode == Mode::Reference ? 1.0 : sim_ref / delta.simulated_time_ns;
          pair.push_back(row);
          release_app(platform, app);
        }
        rows.insert(rows.end(), pair.begin(), pair.end());
      }
    }
  }
  return rows;
}

void write_copy_sweep_csv(std::ostream& out, const ExperimentSpec& spec,
                          const std::vector<CopySweepRow>& rows) {
  write_header(out, spec);
  out << "app,size,scenario,mode,copies,bytes_moved,sim_time_ns,speedup_vs_reference\n";
  for (const auto& r : rows) {
    if (spec.mode != "both" && spec.mode != to_string(r.mode)) continue;
    char tail[64];
    std::snprintf(tail, sizeof(tail), "%.1f,%.4f", r.sim_time_ns, r.speedup_vs_reference);
    out << r.app << ',' << r.size << ',' << r.scenario << ',' << to_string(r.mode) << ','
        << r.copies << ',' << r.bytes_moved << ',' << tail << "\n";
  }
}

std::vector<std::string> check_copy_sweep(const std::vector<CopySweepRow>& rows) {
  std::vector<std::string> violations;
  std::map<std::tuple<std::string, uint32_t, std::string>, std::pair<const CopySweepRow*, const CopySweepRow*>>
      by_case;
  for (const auto& r : rows) {
    auto& slot = by_case[{r.app, r.size, r.scenario}];
    (r.mode == Mode::Reference ? slot.first : slot.second) = &r;
  }
  for (const auto& [key, pair] : by_case) {
    const auto& [app, size, scenario] = key;
    const CopySweepRow* ref = pair.first;
    const CopySweepRow* rimms = pair.second;
    if (!ref || !rimms) continue;
    const std::string tag = app + "/" + scenario + "/n=" + std::to_string(size);
    check(violations, rimms->copies <= ref->copies, tag + ": rimms copies exceed reference");
    if (app == "2fft" && scenario == "acc_acc") {
      check(violations, ref->copies == 4, tag + ": reference copies != 4");
      check(violations, rimms->copies == 1, tag + ": rimms copies != 1");
    }
    if (app == "2fft" && scenario == "cpu_acc") {
      check(violations, ref->copies == 2, tag + ": reference copies != 2");
      check(violations, rimms->copies == 1, tag + ": rimms copies != 1");
    }
    if (app == "2fzf" && scenario == "acc_only") {
      check(violations, ref->copies == 9, tag + ": reference copies != 9");
      check(violations, rimms->copies == 2, tag + ": rimms copies != 2");
    }
    if (scenario == "cpu_cpu" || scenario == "cpu_only") {
      check(violations, ref->copies == 0 && rimms->copies == 0, tag + ": host-only copies != 0");
      check(violations, ref->sim_time_ns == rimms->sim_time_ns,
            tag + ": host-only simulated times differ between modes");
    }
  }
  return violations;
}

// ----- alloc_overhead -------------------------------------------------------------

namespace {

constexpr uint64_t kMicroRegionBytes = 64ull << 20;
constexpr int kMicroBatch = 512;
constexpr int kMicroReps = 15;

// Median per-op cost of an alloc/free pair repeated on an otherwise empty
// heap. Batching keeps clock overhead amortized and the heap returns to
// empty after every pair, so every sample sees the same state.
std::pair<double, double> measure_heap_pair(Heap& heap, uint64_t bytes) {
  std::vector<double> alloc_samples, free_samples;
  for (int rep = 0; rep < kMicroReps; ++rep) {
    double alloc_acc = 0.0, free_acc = 0.0;
    for (int i = 0; i < kMicroBatch; ++i) {
      const double t0 = now_ns();
      const uint64_t off = heap.alloc(bytes);
      const double t1 = now_ns();
      heap.free(off, bytes);
      const double t2 = now_ns();
      alloc_acc += t1 - t0;
      free_acc += t2 - t1;
    }
    alloc_samples.push_back(alloc_acc / kMicroBatch);
    free_samples.push_back(free_acc / kMicroBatch);
  }
  return {median(alloc_samples), median(free_samples)};
}

std::pair<double, double> measure_malloc_pair(uint64_t bytes) {
  std::vector<double> alloc_samples, free_samples;
  for (int rep = 0; rep < kMicroReps; ++rep) {
    double alloc_acc = 0.0, free_acc = 0.0;
    for (int i = 0; i < kMicroBatch; ++i) {
      const double t0 = now_ns();
      void* p = std::malloc(bytes);
      const double t1 = now_ns();
      std::free(p);
      const double t2 = now_ns();
      alloc_acc += t1 - t0;
      free_acc += t2 - t1;
      if (!p) raise(ErrorCode::OutOfResourceMemory, "malloc failed in microbenchmark");
    }
    alloc_samples.push_back(alloc_acc / kMicroBatch);
    free_samples.push_back(free_acc / kMicroBatch);
  }
  return {median(alloc_samples), median(free_samples)};
}

// The PD allocation workload: eight data points of 128 lanes x 128 complex
// samples, allocated either lane by lane or as one allocation plus one
// fragment call per data point, then released.
PdWorkloadRow measure_pd_workload(const PlatformConfig& cfg, const std::string& scheme,
                                  bool use_fragment) {
  constexpr int kPoints = 8, kLanes = 128;
  constexpr uint64_t kLaneBytes = 128 * kBytesPerSample;
  std::vector<double> walls;
  PdWorkloadRow row;
  row.scheme = scheme;
  for (int rep = 0; rep < 9; ++rep) {
    Platform platform(cfg);
    const RunReport before = platform.report();
    std::vector<DataHandle> roots;
    roots.reserve(kPoints * (use_fragment ? 1 : kLanes));
    for (int point = 0; point < kPoints; ++point) {
      if (use_fragment) {
        const DataHandle root = platform.hete_malloc(kLanes * kLaneBytes);
        platform.fragment(root, kLanes);
        roots.push_back(root);
      } else {
        for (int lane = 0; lane < kLanes; ++lane) roots.push_back(platform.hete_malloc(kLaneBytes));
      }
    }
    for (DataHandle h : roots) platform.hete_free(h);
    const RunReport delta = platform.report().diff(before);
    walls.push_back(delta.wall_clock_alloc_ns);
    row.hete_malloc_calls = delta.hete_malloc_calls;
    row.hete_free_calls = delta.hete_free_calls;
    row.fragment_calls = delta.fragment_calls;
  }
  row.wall_ns = median(walls);
  row.mallocs_per_data_point = row.hete_malloc_calls / kPoints;
  return row;
}

}  // namespace

AllocOverheadResult run_alloc_overhead(const ExperimentSpec& spec) {
  AllocOverheadResult result;
  const std::vector<uint64_t> blocks = spec.block_sizes.empty() ? default_block_sizes() : spec.block_sizes;
  std::vector<uint64_t> elems;
  if (spec.sizes.empty()) {
    elems = default_elem_sizes();
  } else {
    for (uint32_t s : spec.sizes) elems.push_back(s);
  }
  for (uint64_t b : blocks)
    if (b < 8 || b > 65536 || (b & (b - 1)) != 0)
      raise(ErrorCode::ConfigError, "block sizes must be powers of two in 8..65536");
  for (uint64_t e : elems)
    if (e < 32 || e > 8192)
      raise(ErrorCode::ConfigError, "problem sizes must lie in 32..8192 float elements");

  for (uint64_t block : blocks) {
    BitsetHeap heap(kMicroRegionBytes, block);
    for (uint64_t e : elems) {
      const auto [alloc_ns, free_ns] = measure_heap_pair(heap, e * sizeof(float));
      result.size_rows.push_back({"bitset", block, e, alloc_ns, free_ns});
    }
  }
  {
    NextFitHeap heap(kMicroRegionBytes);
    for (uint64_t e : elems) {
      const auto [alloc_ns, free_ns] = measure_heap_pair(heap, e * sizeof(float));
      result.size_rows.push_back({"next_fit", 0, e, alloc_ns, free_ns});
    }
  }
  for (uint64_t e : elems) {
    const auto [alloc_ns, free_ns] = measure_malloc_pair(e * sizeof(float));
    result.size_rows.push_back({"malloc", 0, e, alloc_ns, free_ns});
  }

  const PlatformConfig base = load_platform_config(spec.platform);
  result.pd_rows.push_back(
      measure_pd_workload(base.with_heap_policy(HeapPolicy::Bitset, 4096), "bitset", false));
  result.pd_rows.push_back(
      measure_pd_workload(base.with_heap_policy(HeapPolicy::NextFit), "next_fit", false));
  result.pd_rows.push_back(measure_pd_workload(base.with_heap_policy(HeapPolicy::NextFit),
                                               "next_fit_fragment", true));
  return result;
}

void write_alloc_overhead_csv(std::ostream& out, const ExperimentSpec& spec,
                              const AllocOverheadResult& result) {
  write_header(out, spec);
  out << "section,scheme,block_size,elems,alloc_ns,free_ns\n";
  for (const auto& r : result.size_rows)
    out << "size_sweep," << r.scheme << ',' << r.block_size << ',' << r.elems << ','
        << r.alloc_ns << ',' << r.free_ns << "\n";
  out << "section,scheme,wall_ns,hete_malloc_calls,hete_free_calls,fragment_calls,"
         "mallocs_per_data_point\n";
  for (const auto& r : result.pd_rows) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.0f", r.wall_ns);
    out << "pd_workload," << r.scheme << ',' << wall << ',' << r.hete_malloc_calls << ','
        << r.hete_free_calls << ',' << r.fragment_calls << ',' << r.mallocs_per_data_point
        << "\n";
  }
}

std::vector<std::string> check_alloc_overhead(const AllocOverheadResult& result) {
  std::vector<std::string> violations;

  // Bitset cost at the largest problem size must fall as blocks grow; the
  // trend is asserted on a 4x-spaced subset of the sweep so each step is a
  // large factor in probe count.
  const std::vector<uint64_t> chain = {8, 64, 512, 4096};
  uint64_t max_elems = 0;
  for (const auto& r : result.size_rows)
    if (r.scheme == "bitset") max_elems = std::max(max_elems, r.elems);
  double prev = -1.0;
  uint64_t prev_block = 0;
  for (uint64_t block : chain) {
    for (const auto& r : result.size_rows) {
      if (r.scheme != "bitset" || r.block_size != block || r.elems != max_elems) continue;
      if (prev >= 0.0)
        check(violations, r.alloc_ns < prev,
              "bitset alloc cost did not decrease from block " + std::to_string(prev_block) +
                  " to " + std::to_string(block));
      prev = r.alloc_ns;
      prev_block = block;
    }
  }

  const PdWorkloadRow* bitset = nullptr;
  const PdWorkloadRow* nf = nullptr;
  const PdWorkloadRow* frag = nullptr;
  for (const auto& r : result.pd_rows) {
    if (r.scheme == "bitset") bitset = &r;
    if (r.scheme == "next_fit") nf = &r;
    if (r.scheme == "next_fit_fragment") frag = &r;
  }
  if (bitset && nf && frag) {
    check(violations, nf->wall_ns * 1.2 <= bitset->wall_ns,
          "pd workload: next_fit not at least 1.2x faster than bitset");
    check(violations, frag->wall_ns * 1.2 <= nf->wall_ns,
          "pd workload: next_fit_fragment not at least 1.2x faster than next_fit");
    check(violations, bitset->mallocs_per_data_point == 128,
          "pd workload: bitset mallocs per data point != 128");
    check(violations, nf->mallocs_per_data_point == 128,
          "pd workload: next_fit mallocs per data point != 128");
    check(violations, frag->mallocs_per_data_point == 1,
          "pd workload: fragment mallocs per data point != 1");
  } else {
    violations.push_back("pd workload rows missing");
  }
  return violations;
}

// ----- flag_overhead ---------------------------------------------------------------

std::vector<FlagOverheadRow> run_flag_overhead(const ExperimentSpec& spec) {
  Platform platform(load_platform_config(spec.platform));
  const uint64_t iterations = 1000000;
  std::vector<FlagOverheadRow> rows;
  for (uint64_t bytes : {uint64_t{1} << 10, uint64_t{1} << 20}) {
    const DataHandle h = platform.hete_malloc(bytes);
    const double ns = measure_flag_check_ns(platform, h, iterations);
    rows.push_back({bytes, iterations, ns});
    platform.hete_free(h);
  }
  return rows;
}

void write_flag_overhead_csv(std::ostream& out, const ExperimentSpec& spec,
                             const std::vector<FlagOverheadRow>& rows) {
  write_header(out, spec);
  out << "handle_bytes,iterations,ns_per_check\n";
  for (const auto& r : rows)
    out << r.handle_bytes << ',' << r.iterations << ',' << r.ns_per_check << "\n";
}

std::vector<std::string> check_flag_overhead(const std::vector<FlagOverheadRow>& rows) {
  std::vector<std::string> violations;
  check(violations, rows.size() >= 2, "flag overhead needs at least two handle sizes");
  double lo = 1e30, hi = 0.0;
  for (const auto& r : rows) {
    check(violations, r.ns_per_check < 100.0,
          "flag check at " + std::to_string(r.handle_bytes) + " bytes is not below 100 ns");
    lo = std::min(lo, r.ns_per_check);
    hi = std::max(hi, r.ns_per_check);
  }
  if (!rows.empty())
    check(violations, hi <= 2.0 * lo, "flag check cost varies more than 2x across handle sizes");
  return violations;
}

// ----- pd_repeat --------------------------------------------------------------------

namespace {

struct SchemeSetup {
  std::string name;
  HeapPolicy policy;
  uint64_t block_size;
  bool use_fragment;
};

// Wall time of building and releasing the PD handle set, medianed over a
// few rounds; folded into the overall time through the alloc-cost knob.
double measure_pd_alloc_wall(const PlatformConfig& cfg, const SchemeSetup& scheme,
                             uint32_t scale, uint64_t seed) {
  std::vector<double> walls;
  for (int rep = 0; rep < 7; ++rep) {
    Platform platform(cfg);
    const RunReport before = platform.report();
    BuiltApp app = build_pd(platform, scale, scheme.use_fragment, seed);
    release_app(platform, app);
    walls.push_back(platform.report().diff(before).wall_clock_alloc_ns);
  }
  return median(walls);
}

}  // namespace

std::vector<PdRepeatRow> run_pd_repeat(const ExperimentSpec& spec) {
  const PlatformConfig base = load_platform_config(spec.platform);
  std::vector<uint64_t> repeats = spec.repeats;
  if (repeats.empty()) repeats = {1, 10, 50, 100, 1000};
  for (uint64_t k : repeats)
    if (k == 0) raise(ErrorCode::ConfigError, "repeat counts must be positive");

  const std::vector<SchemeSetup> schemes = {
      {"bitset", HeapPolicy::Bitset, 4096, false},
      {"next_fit", HeapPolicy::NextFit, 4096, false},
      {"next_fit_fragment", HeapPolicy::NextFit, 4096, true},
  };

  std::vector<PdRepeatRow> rows;
  for (const auto& scheme : schemes) {
    const PlatformConfig cfg = base.with_heap_policy(scheme.policy, scheme.block_size);
    const double alloc_wall = measure_pd_alloc_wall(cfg, scheme, spec.scale, spec.seed);
    const double alloc_sim = alloc_wall * cfg.alloc_cost_scale;

    for (uint64_t k : repeats) {
      PdRepeatRow row;
      row.repeats = k;
      row.scheme = scheme.name;
      row.alloc_wall_ns = alloc_wall;

      for (Mode mode : {Mode::Reference, Mode::Rimms}) {
        Platform platform(cfg);
        BuiltApp app = build_pd(platform, spec.scale, scheme.use_fragment, spec.seed);
        const Schedule schedule = Schedule::round_robin(scenario_pool(platform, "acc_only"));
        const RunReport before = platform.report();
        for (uint64_t i = 0; i < k; ++i) run_app_pass(platform, app, schedule, mode);
        const double comp = platform.report().diff(before).simulated_time_ns;
        release_app(platform, app);
        if (mode == Mode::Reference) {
          row.comp_ref_ns = comp;
          row.overall_ref_ns = comp + alloc_sim;
        } else {
          row.comp_rimms_ns = comp;
          row.overall_rimms_ns = comp + alloc_sim;
        }
      }
      row.comp_speedup = row.comp_ref_ns / row.comp_rimms_ns;
      row.overall_speedup = row.overall_ref_ns / row.overall_rimms_ns;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_pd_repeat_csv(std::ostream& out, const ExperimentSpec& spec,
                         const std::vector<PdRepeatRow>& rows) {
  write_header(out, spec);
  out << "repeats,scheme,comp_ref_ns,comp_rimms_ns,comp_speedup,alloc_wall_ns,"
         "overall_ref_ns,overall_rimms_ns,overall_speedup\n";
  for (const auto& r : rows) {
    char line[256];
    std::snprintf(line, sizeof(line), "%llu,%s,%.0f,%.0f,%.4f,%.0f,%.0f,%.0f,%.4f",
                  static_cast<unsigned long long>(r.repeats), r.scheme.c_str(), r.comp_ref_ns,
                  r.comp_rimms_ns, r.comp_speedup, r.alloc_wall_ns, r.overall_ref_ns,
                  r.overall_rimms_ns, r.overall_speedup);
    out << line << "\n";
  }
}

std::vector<std::string> check_pd_repeat(const std::vector<PdRepeatRow>& rows,
                                         bool assert_scheme_ordering) {
  std::vector<std::string> violations;
  std::map<std::string, std::vector<const PdRepeatRow*>> by_scheme;
  for (const auto& r : rows) by_scheme[r.scheme].push_back(&r);

  for (auto& [scheme, list] : by_scheme) {
    std::sort(list.begin(), list.end(),
              [](const PdRepeatRow* a, const PdRepeatRow* b) { return a->repeats < b->repeats; });
    for (size_t i = 1; i < list.size(); ++i)
      check(violations, list[i]->overall_speedup >= list[i - 1]->overall_speedup,
            scheme + ": overall speedup decreased from " + std::to_string(list[i - 1]->repeats) +
                " to " + std::to_string(list[i]->repeats) + " repeats");
    if (scheme == "next_fit_fragment") {
      for (const PdRepeatRow* r : list) {
        if (r->repeats < 50) continue;
        const double rel = std::abs(r->overall_speedup - r->comp_speedup) / r->comp_speedup;
        check(violations, rel <= 0.01,
              scheme + ": overall speedup off computation-only by more than 1% at " +
                  std::to_string(r->repeats) + " repeats");
      }
    }
  }

  if (!assert_scheme_ordering) return violations;

  // Row-1 ordering across schemes mirrors the workload ordering; its margin
  // comes from the full-width allocation pattern, so it is asserted only
  // there (desk-scale walls are tens of microseconds and noise-limited).
  const PdRepeatRow* first[3] = {nullptr, nullptr, nullptr};
  for (const auto& r : rows) {
    if (r.repeats != 1) continue;
    if (r.scheme == "bitset") first[0] = &r;
    if (r.scheme == "next_fit") first[1] = &r;
    if (r.scheme == "next_fit_fragment") first[2] = &r;
  }
  if (first[0] && first[1] && first[2]) {
    check(violations, first[2]->overall_speedup > first[1]->overall_speedup,
          "repeats=1: fragment speedup not above next_fit");
    check(violations, first[1]->overall_speedup > first[0]->overall_speedup,
          "repeats=1: next_fit speedup not above bitset");
  }
  return violations;
}

// ----- app_run -----------------------------------------------------------------------

AppRunResult run_app_experiment(const ExperimentSpec& spec) {
  if (spec.app != "rc" && spec.app != "pd" && spec.app != "sar")
    raise(ErrorCode::ConfigError, "app_run app must be one of rc, pd, sar");
  const std::string scenario = spec.scenario.empty() ? "acc_only" : spec.scenario;
  const PlatformConfig cfg = load_platform_config(spec.platform);

  AppRunResult result;
  result.app = spec.app;
  result.scenario = scenario;
  result.platform = cfg.name;

  std::ofstream trace_out;
  if (!spec.trace_path.empty()) {
    trace_out.open(spec.trace_path);
    if (!trace_out)
      raise(ErrorCode::ConfigError, "cannot write trace to '" + spec.trace_path + "'");
  }

  for (Mode mode : {Mode::Reference, Mode::Rimms}) {
    Platform platform(cfg);
    BuiltApp app = build_app(platform, spec.app, 0, spec.scale, spec.use_fragment, spec.seed);
    const Schedule schedule = Schedule::round_robin(scenario_pool(platform, scenario));
    platform.enable_trace(trace_out.is_open());
    const RunReport report = run_app_pass(platform, app, schedule, mode);
    if (trace_out.is_open()) {
      trace_out << "# mode=" << to_string(mode) << "\n";
      trace_out << "# event,task,resource,domain_src,domain_dst,bytes,vtime\n";
      for (const auto& ev : platform.take_trace()) trace_out << format_trace_line(ev) << "\n";
    }
    const uint64_t checksum = output_checksum(platform, app);
    release_app(platform, app);
    if (mode == Mode::Reference) {
      result.reference = report;
      result.checksum_reference = checksum;
    } else {
      result.rimms = report;
      result.checksum_rimms = checksum;
    }
  }
  result.checksums_equal = result.checksum_reference == result.checksum_rimms;
  return result;
}

std::string app_run_json(const ExperimentSpec& spec, const AppRunResult& result) {
  json doc;
  doc["experiment"] = "app_run";
  doc["app"] = result.app;
  doc["scenario"] = result.scenario;
  doc["platform"] = result.platform;
  doc["seed"] = spec.seed;
  doc["scale"] = spec.scale;
  doc["use_fragment"] = spec.use_fragment;
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(spec.config_hash()));
  doc["config_hash"] = hash;
  doc["reference"] = json::parse(result.reference.to_json());
  doc["rimms"] = json::parse(result.rimms.to_json());
  char ref_sum[32], rimms_sum[32];
  std::snprintf(ref_sum, sizeof(ref_sum), "%016llx",
                static_cast<unsigned long long>(result.checksum_reference));
  std::snprintf(rimms_sum, sizeof(rimms_sum), "%016llx",
                static_cast<unsigned long long>(result.checksum_rimms));
  doc["output_checksum_reference"] = ref_sum;
  doc["output_checksum_rimms"] = rimms_sum;
  doc["checksums_equal"] = result.checksums_equal;
  return doc.dump(2);
}

std::vector<std::string> check_app_run(const AppRunResult& result) {
  std::vector<std::string> violations;
  check(violations, result.checksums_equal, result.app + ": mode output checksums differ");
  check(violations, result.rimms.copies_total <= result.reference.copies_total,
        result.app + ": rimms moved more copies than reference");
  if (result.app == "rc" && result.scenario == "3cpu_1gpu")
    check(violations, result.rimms.copies_total == result.reference.copies_total,
          "rc/3cpu_1gpu: copy counts should match between modes");
  if (result.app == "pd" && (result.scenario == "gpu_only" || result.scenario == "acc_only"))
    check(violations, result.rimms.copies_total < result.reference.copies_total,
          "pd: rimms should eliminate copies");
  return violations;
}

}  // namespace hetmem
