// hetmem-bench: experiment harness over the hetmem library. Subcommands run
// one experiment family each and write CSV (sweeps) or JSON (single runs);
// --assert turns the built-in expectation checks into the exit status.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetmem/experiments.hpp"

namespace {

using hetmem::ExperimentSpec;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitAssertFailed = 2;

// Accepts "64..2048" (powers-of-two range), "64,128,256", or a single value.
std::vector<uint64_t> parse_range(const std::string& text) {
  auto number = [&](const std::string& item) -> uint64_t {
    try {
      size_t used = 0;
      const uint64_t v = std::stoull(item, &used);
      if (used != item.size() || v == 0) throw std::invalid_argument(item);
      return v;
    } catch (const std::exception&) {
      hetmem::raise(hetmem::ErrorCode::ConfigError,
                    "'" + text + "' is not a value, list, or lo..hi range");
    }
  };
  std::vector<uint64_t> out;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    const uint64_t lo = number(text.substr(0, dots));
    const uint64_t hi = number(text.substr(dots + 2));
    for (uint64_t v = lo; v <= hi; v *= 2) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(number(item));
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) hetmem::raise(hetmem::ErrorCode::ConfigError, "cannot write to '" + path + "'");
  return out;
}

int report_checks(const std::vector<std::string>& violations, bool assert_checks) {
  for (const auto& v : violations) std::cerr << "assertion failed: " << v << "\n";
  if (violations.empty() || !assert_checks) return kExitOk;
  return kExitAssertFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Memory-management benchmarks on a simulated heterogeneous platform"};
  cli.require_subcommand(1);

  ExperimentSpec spec;
  std::string config_path, sizes_text, blocks_text, repeats_text;
  bool no_fragment = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment spec JSON file");
    sub->add_option("--platform", spec.platform, "preset name (zcu102, jetson) or config path");
    sub->add_option("--mode", spec.mode, "reference | rimms | both");
    sub->add_option("--sizes", sizes_text, "sample counts, e.g. 64..2048 or 64,256");
    sub->add_option("--block-sizes", blocks_text, "bitset block sizes, e.g. 8..65536");
    sub->add_option("--repeats", repeats_text, "repeat counts, e.g. 1,10,50,100,1000");
    sub->add_option("--scale", spec.scale, "width divisor for pd/sar");
    sub->add_option("--seed", spec.seed, "input RNG seed");
    sub->add_option("--out", spec.out_path, "output file (default: stdout)");
    sub->add_flag("--assert", spec.assert_checks, "fail (exit 2) when expectation checks fail");
    sub->add_flag("--no-fragment", no_fragment, "build pd/sar without the fragment path");
    return sub;
  };

  auto* copy_sweep = add_common(cli.add_subcommand("copy_sweep", "copy counts per app/size/scenario"));
  copy_sweep->add_option("--app", spec.app, "2fft | 2fzf | 3zip | all");
  auto* alloc_overhead =
      add_common(cli.add_subcommand("alloc_overhead", "heap costs vs block and problem size"));
  auto* flag_overhead =
      add_common(cli.add_subcommand("flag_overhead", "per-input flag check microbenchmark"));
  auto* pd_repeat =
      add_common(cli.add_subcommand("pd_repeat", "pd speedup convergence over repeat counts"));
  auto* app_run = add_common(cli.add_subcommand("app_run", "full report pair for one app"));
  app_run->add_option("--app", spec.app, "rc | pd | sar");
  app_run->add_option("--scenario", spec.scenario, "cpu_only | acc_only | gpu_only | 3cpu_1gpu");
  app_run->add_option("--trace", spec.trace_path, "write a line-oriented event log here");

  CLI11_PARSE(cli, argc, argv);

  try {
    CLI::App* active = cli.get_subcommands().front();
    spec.experiment = active->get_name();

    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in)
        hetmem::raise(hetmem::ErrorCode::ConfigError, "cannot read '" + config_path + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      ExperimentSpec merged = spec;           // defaults + CLI-bound values
      merged.merge_json(buf.str());           // file settings overwrite them...
      // ...so copy back from `merged` only where the command line was silent.
      if (active->count("--platform") == 0) spec.platform = merged.platform;
      if (active->count("--mode") == 0) spec.mode = merged.mode;
      if (active->get_option_no_throw("--app") && active->count("--app") == 0)
        spec.app = merged.app;
      if (active->get_option_no_throw("--scenario") && active->count("--scenario") == 0)
        spec.scenario = merged.scenario;
      if (active->count("--sizes") == 0) spec.sizes = merged.sizes;
      if (active->count("--block-sizes") == 0) spec.block_sizes = merged.block_sizes;
      if (active->count("--repeats") == 0) spec.repeats = merged.repeats;
      if (active->count("--scale") == 0) spec.scale = merged.scale;
      if (active->count("--seed") == 0) spec.seed = merged.seed;
      if (active->count("--out") == 0) spec.out_path = merged.out_path;
      if (active->get_option_no_throw("--trace") && active->count("--trace") == 0)
        spec.trace_path = merged.trace_path;
      if (active->count("--assert") == 0) spec.assert_checks = merged.assert_checks;
      if (active->count("--no-fragment") == 0) spec.use_fragment = merged.use_fragment;
    }
    if (!sizes_text.empty()) {
      spec.sizes.clear();
      for (uint64_t v : parse_range(sizes_text)) spec.sizes.push_back(static_cast<uint32_t>(v));
    }
    if (!blocks_text.empty()) spec.block_sizes = parse_range(blocks_text);
    if (!repeats_text.empty()) spec.repeats = parse_range(repeats_text);
    if (no_fragment) spec.use_fragment = false;

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!spec.out_path.empty()) {
      file = open_out(spec.out_path);
      out = &file;
    }

    if (copy_sweep->parsed()) {
      const auto rows = hetmem::run_copy_sweep(spec);
      hetmem::write_copy_sweep_csv(*out, spec, rows);
      return report_checks(hetmem::check_copy_sweep(rows), spec.assert_checks);
    }
    if (alloc_overhead->parsed()) {
      const auto result = hetmem::run_alloc_overhead(spec);
      hetmem::write_alloc_overhead_csv(*out, spec, result);
      return report_checks(hetmem::check_alloc_overhead(result), spec.assert_checks);
    }
    if (flag_overhead->parsed()) {
      const auto rows = hetmem::run_flag_overhead(spec);
      hetmem::write_flag_overhead_csv(*out, spec, rows);
      return report_checks(hetmem::check_flag_overhead(rows), spec.assert_checks);
    }
    if (pd_repeat->parsed()) {
      const auto rows = hetmem::run_pd_repeat(spec);
      hetmem::write_pd_repeat_csv(*out, spec, rows);
      return report_checks(hetmem::check_pd_repeat(rows, spec.scale == 1), spec.assert_checks);
    }
    if (app_run->parsed()) {
      const auto result = hetmem::run_app_experiment(spec);
      *out << hetmem::app_run_json(spec, result) << "\n";
      return report_checks(hetmem::check_app_run(result), spec.assert_checks);
    }
  } catch (const hetmem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}
