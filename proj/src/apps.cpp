#include "hetmem/apps.hpp"

#include <cstring>
#include <random>

namespace hetmem {

namespace {

// Seeded uniform complex samples in [-1, 1]^2.
std::vector<std::byte> random_samples(uint64_t bytes, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<Complex> v(bytes / kBytesPerSample);
  for (auto& c : v) {
    const float re = dist(rng);
    const float im = dist(rng);
    c = Complex(re, im);
  }
  std::vector<std::byte> out(bytes);
  std::memcpy(out.data(), v.data(), bytes);
  return out;
}

void fill_input(Platform& p, DataHandle h, std::mt19937_64& rng) {
  p.write_host(h, random_samples(p.data_size(h), rng));
}

// A lane-split data point: one fragmented root or one plain handle per lane.
struct LaneSet {
  DataHandle root{};            // 0 when per-lane handles are used
  std::vector<DataHandle> lanes;
};

LaneSet make_lanes(Platform& p, uint32_t lane_count, uint64_t lane_bytes, bool use_fragment,
                   std::vector<DataHandle>& roots) {
  LaneSet set;
  if (use_fragment) {
    set.root = p.hete_malloc(static_cast<uint64_t>(lane_count) * lane_bytes);
    roots.push_back(set.root);
    set.lanes = p.fragment(set.root, lane_count);
  } else {
    set.lanes.reserve(lane_count);
    for (uint32_t i = 0; i < lane_count; ++i) {
      set.lanes.push_back(p.hete_malloc(lane_bytes));
      roots.push_back(set.lanes.back());
    }
  }
  return set;
}

void fill_lanes(Platform& p, const LaneSet& set, std::mt19937_64& rng) {
  if (set.root.id != 0) {
    fill_input(p, set.root, rng);
  } else {
    for (DataHandle h : set.lanes) fill_input(p, h, rng);
  }
}

int add_task(Dag& dag, std::string label, ApiCall call) {
  const int id = static_cast<int>(dag.tasks.size());
  dag.tasks.push_back(Task{id, std::move(label), std::move(call)});
  return id;
}

ApiCall unary(Kernel k, DataHandle in, DataHandle out, uint64_t n) {
  ApiCall c;
  c.kernel = k;
  c.inputs = {in};
  c.outputs = {out};
  c.n = n;
  return c;
}

ApiCall binary(Kernel k, DataHandle a, DataHandle b, DataHandle out, uint64_t n) {
  ApiCall c;
  c.kernel = k;
  c.inputs = {a, b};
  c.outputs = {out};
  c.n = n;
  return c;
}

}  // namespace

BuiltApp build_2fft(Platform& p, uint32_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const uint64_t bytes = static_cast<uint64_t>(n) * kBytesPerSample;
  BuiltApp app;
  app.name = "2fft";
  const DataHandle x = p.hete_malloc(bytes);
  const DataHandle mid = p.hete_malloc(bytes);
  const DataHandle y = p.hete_malloc(bytes);
  app.roots = {x, mid, y};
  fill_input(p, x, rng);
  add_task(app.dag, "fft", unary(Kernel::Fft, x, mid, n));
  add_task(app.dag, "ifft", unary(Kernel::Ifft, mid, y, n));
  app.inputs = {x};
  app.outputs = {y};
  return app;
}

BuiltApp build_2fzf(Platform& p, uint32_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const uint64_t bytes = static_cast<uint64_t>(n) * kBytesPerSample;
  BuiltApp app;
  app.name = "2fzf";
  const DataHandle x1 = p.hete_malloc(bytes);
  const DataHandle x2 = p.hete_malloc(bytes);
  const DataHandle f1 = p.hete_malloc(bytes);
  const DataHandle f2 = p.hete_malloc(bytes);
  const DataHandle z = p.hete_malloc(bytes);
  const DataHandle y = p.hete_malloc(bytes);
  app.roots = {x1, x2, f1, f2, z, y};
  fill_input(p, x1, rng);
  fill_input(p, x2, rng);
  add_task(app.dag, "fft_a", unary(Kernel::Fft, x1, f1, n));
  add_task(app.dag, "fft_b", unary(Kernel::Fft, x2, f2, n));
  add_task(app.dag, "zip", binary(Kernel::Zip, f1, f2, z, n));
  add_task(app.dag, "ifft", unary(Kernel::Ifft, z, y, n));
  app.inputs = {x1, x2};
  app.outputs = {y};
  return app;
}

BuiltApp build_3zip(Platform& p, uint32_t n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const uint64_t bytes = static_cast<uint64_t>(n) * kBytesPerSample;
  BuiltApp app;
  app.name = "3zip";
  const DataHandle a = p.hete_malloc(bytes);
  const DataHandle b = p.hete_malloc(bytes);
  const DataHandle c = p.hete_malloc(bytes);
  const DataHandle d = p.hete_malloc(bytes);
  const DataHandle z1 = p.hete_malloc(bytes);
  const DataHandle z2 = p.hete_malloc(bytes);
  const DataHandle z3 = p.hete_malloc(bytes);
  app.roots = {a, b, c, d, z1, z2, z3};
  for (DataHandle h : {a, b, c, d}) fill_input(p, h, rng);
  add_task(app.dag, "zip_ab", binary(Kernel::Zip, a, b, z1, n));
  add_task(app.dag, "zip_cd", binary(Kernel::Zip, c, d, z2, n));
  add_task(app.dag, "zip_out", binary(Kernel::Zip, z1, z2, z3, n));
  app.inputs = {a, b, c, d};
  app.outputs = {z3};
  return app;
}

BuiltApp build_rc(Platform& p, uint64_t seed) {
  BuiltApp app = build_2fzf(p, 256, seed);
  app.name = "rc";
  return app;
}

BuiltApp build_pd(Platform& p, uint32_t scale, bool use_fragment, uint64_t seed) {
  constexpr uint32_t kFullLanes = 128;
  constexpr uint32_t kSamples = 128;
  if (scale == 0 || kFullLanes % scale != 0)
    raise(ErrorCode::InvalidScale, "scale must divide " + std::to_string(kFullLanes));
  const uint32_t lanes = kFullLanes / scale;
  const uint64_t lane_bytes = kSamples * kBytesPerSample;

  std::mt19937_64 rng(seed);
  BuiltApp app;
  app.name = "pd";

  // The eight data points of the processing flow, one per graph edge:
  // pulse/reference inputs, their spectra, the zip product, the ifft
  // result, the corner-turned matrix, and the final doppler spectra.
  LaneSet x = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet y = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet fx = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet fy = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet z = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet v = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet r = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);
  LaneSet d = make_lanes(p, lanes, lane_bytes, use_fragment, app.roots);

  fill_lanes(p, x, rng);
  fill_lanes(p, y, rng);

  for (uint32_t l = 0; l < lanes; ++l)
    add_task(app.dag, "fft_x" + std::to_string(l), unary(Kernel::Fft, x.lanes[l], fx.lanes[l], kSamples));
  for (uint32_t l = 0; l < lanes; ++l)
    add_task(app.dag, "fft_y" + std::to_string(l), unary(Kernel::Fft, y.lanes[l], fy.lanes[l], kSamples));
  for (uint32_t l = 0; l < lanes; ++l)
    add_task(app.dag, "zip" + std::to_string(l),
             binary(Kernel::Zip, fx.lanes[l], fy.lanes[l], z.lanes[l], kSamples));
  for (uint32_t l = 0; l < lanes; ++l)
    add_task(app.dag, "ifft" + std::to_string(l), unary(Kernel::Ifft, z.lanes[l], v.lanes[l], kSamples));

  // Data rearrangement between pulse and doppler processing: a corner turn
  // over the lanes x samples matrix, executed on the host.
  {
    ApiCall turn;
    turn.kernel = Kernel::CpuStage;
    turn.inputs = v.lanes;
    turn.outputs = r.lanes;
    turn.n = static_cast<uint64_t>(lanes) * kSamples;
    turn.stage_rows = lanes;
    turn.stage_cols = kSamples;
    add_task(app.dag, "corner_turn", std::move(turn));
  }

  for (uint32_t l = 0; l < lanes; ++l)
    add_task(app.dag, "fft_d" + std::to_string(l), unary(Kernel::Fft, r.lanes[l], d.lanes[l], kSamples));

  app.inputs.insert(app.inputs.end(), x.lanes.begin(), x.lanes.end());
  app.inputs.insert(app.inputs.end(), y.lanes.begin(), y.lanes.end());
  app.outputs = d.lanes;
  return app;
}

BuiltApp build_sar(Platform& p, uint32_t scale, bool use_fragment, uint64_t seed) {
  constexpr uint32_t kLanesA = 512, kSamplesA = 256;
  constexpr uint32_t kLanesB = 256, kSamplesB = 512;
  if (scale == 0 || kLanesA % scale != 0 || kLanesB % scale != 0)
    raise(ErrorCode::InvalidScale, "scale must divide both phase widths");
  const uint32_t lanes_a = kLanesA / scale;
  const uint32_t lanes_b = kLanesB / scale;
  const uint64_t bytes_a = kSamplesA * kBytesPerSample;
  const uint64_t bytes_b = kSamplesB * kBytesPerSample;

  std::mt19937_64 rng(seed);
  BuiltApp app;
  app.name = "sar";

  LaneSet xa = make_lanes(p, lanes_a, bytes_a, use_fragment, app.roots);
  const DataHandle ref_t = p.hete_malloc(bytes_a);  // range reference, time domain
  const DataHandle ref_f = p.hete_malloc(bytes_a);  // its spectrum, shared by phase-A zips
  LaneSet fa = make_lanes(p, lanes_a, bytes_a, use_fragment, app.roots);
  LaneSet za = make_lanes(p, lanes_a, bytes_a, use_fragment, app.roots);
  LaneSet va = make_lanes(p, lanes_a, bytes_a, use_fragment, app.roots);
  LaneSet rb = make_lanes(p, lanes_b, bytes_b, use_fragment, app.roots);
  const DataHandle win_b = p.hete_malloc(bytes_b);  // azimuth window, time domain
  LaneSet fb = make_lanes(p, lanes_b, bytes_b, use_fragment, app.roots);
  LaneSet zb = make_lanes(p, lanes_b, bytes_b, use_fragment, app.roots);
  LaneSet vb = make_lanes(p, lanes_b, bytes_b, use_fragment, app.roots);
  app.roots.push_back(ref_t);
  app.roots.push_back(ref_f);
  app.roots.push_back(win_b);

  fill_lanes(p, xa, rng);
  fill_input(p, ref_t, rng);
  fill_input(p, win_b, rng);

  add_task(app.dag, "fft_ref", unary(Kernel::Fft, ref_t, ref_f, kSamplesA));
  for (uint32_t l = 0; l < lanes_a; ++l)
    add_task(app.dag, "a_fft" + std::to_string(l), unary(Kernel::Fft, xa.lanes[l], fa.lanes[l], kSamplesA));
  for (uint32_t l = 0; l < lanes_a; ++l)
    add_task(app.dag, "a_zip" + std::to_string(l),
             binary(Kernel::Zip, fa.lanes[l], ref_f, za.lanes[l], kSamplesA));
  for (uint32_t l = 0; l < lanes_a; ++l)
    add_task(app.dag, "a_ifft" + std::to_string(l), unary(Kernel::Ifft, za.lanes[l], va.lanes[l], kSamplesA));

  {
    ApiCall turn;
    turn.kernel = Kernel::CpuStage;
    turn.inputs = va.lanes;
    turn.outputs = rb.lanes;
    turn.n = static_cast<uint64_t>(lanes_a) * kSamplesA;
    turn.stage_rows = lanes_a;
    turn.stage_cols = kSamplesA;
    add_task(app.dag, "corner_turn", std::move(turn));
  }

  for (uint32_t l = 0; l < lanes_b; ++l)
    add_task(app.dag, "b_fft" + std::to_string(l), unary(Kernel::Fft, rb.lanes[l], fb.lanes[l], kSamplesB));
  for (uint32_t l = 0; l < lanes_b; ++l)
    add_task(app.dag, "b_zip" + std::to_string(l),
             binary(Kernel::Zip, fb.lanes[l], win_b, zb.lanes[l], kSamplesB));
  for (uint32_t l = 0; l < lanes_b; ++l)
    add_task(app.dag, "b_ifft" + std::to_string(l), unary(Kernel::Ifft, zb.lanes[l], vb.lanes[l], kSamplesB));

  app.inputs.insert(app.inputs.end(), xa.lanes.begin(), xa.lanes.end());
  app.inputs.push_back(ref_t);
  app.inputs.push_back(win_b);
  app.outputs = vb.lanes;
  return app;
}

BuiltApp build_app(Platform& p, std::string_view name, uint32_t n, uint32_t scale,
                   bool use_fragment, uint64_t seed) {
  if (name == "2fft") return build_2fft(p, n, seed);
  if (name == "2fzf") return build_2fzf(p, n, seed);
  if (name == "3zip") return build_3zip(p, n, seed);
  if (name == "rc") return build_rc(p, seed);
  if (name == "pd") return build_pd(p, scale, use_fragment, seed);
  if (name == "sar") return build_sar(p, scale, use_fragment, seed);
  raise(ErrorCode::ConfigError, "unknown app '" + std::string(name) + "'");
}

RunReport run_app_pass(Platform& p, const BuiltApp& app, const Schedule& schedule, Mode mode) {
  const RunReport before = p.report();
  for (DataHandle h : app.inputs) p.mark_host_write(h);
  run_dag(p, app.dag, schedule, mode);
  for (DataHandle h : app.outputs) p.hete_sync(h);
  return p.report().diff(before);
}

void release_app(Platform& p, const BuiltApp& app) {
  for (DataHandle h : app.roots) p.hete_free(h);
}

uint64_t output_checksum(const Platform& p, const BuiltApp& app) {
  uint64_t hash = 1469598103934665603ull;  // FNV-1a offset basis
  for (DataHandle h : app.outputs) {
    for (std::byte b : p.read_host(h)) {
      hash ^= static_cast<uint64_t>(b);
      hash *= 1099511628211ull;
    }
  }
  return hash;
}

void validate_dag(const Platform& p, const Dag& dag) {
  topological_order(dag);  // throws CycleDetected on a cyclic graph
  for (const Task& t : dag.tasks) {
    const ApiCall& c = t.call;
    for (DataHandle h : c.inputs)
      if (p.is_fragmented_root(h))
        raise(ErrorCode::InvalidArgument, t.label + ": fragmented handle used as an operand");
    for (DataHandle h : c.outputs)
      if (p.is_fragmented_root(h))
        raise(ErrorCode::InvalidArgument, t.label + ": fragmented handle used as an operand");
    auto samples = [&](DataHandle h) { return p.data_size(h) / kBytesPerSample; };
    switch (c.kernel) {
      case Kernel::Fft:
      case Kernel::Ifft:
        if (c.inputs.size() != 1 || c.outputs.size() != 1)
          raise(ErrorCode::InvalidArgument, t.label + ": fft arity");
        if (samples(c.inputs[0]) != c.n || samples(c.outputs[0]) != c.n)
          raise(ErrorCode::LengthMismatch, t.label + ": handle extent vs n");
        break;
      case Kernel::Zip:
        if (c.inputs.size() != 2 || c.outputs.size() != 1)
          raise(ErrorCode::InvalidArgument, t.label + ": zip arity");
        for (DataHandle h : c.inputs)
          if (samples(h) != c.n) raise(ErrorCode::LengthMismatch, t.label + ": handle extent vs n");
        if (samples(c.outputs[0]) != c.n)
          raise(ErrorCode::LengthMismatch, t.label + ": handle extent vs n");
        break;
      case Kernel::CpuStage: {
        uint64_t in = 0, out = 0;
        for (DataHandle h : c.inputs) in += samples(h);
        for (DataHandle h : c.outputs) out += samples(h);
        if (in != out || in != c.n)
          raise(ErrorCode::LengthMismatch, t.label + ": stage extents");
        if (c.stage_rows != 0 && static_cast<uint64_t>(c.stage_rows) * c.stage_cols != in)
          raise(ErrorCode::LengthMismatch, t.label + ": rows x cols vs extent");
        break;
      }
    }
  }
}

}  // namespace hetmem
