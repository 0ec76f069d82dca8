#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "hetmem/apps.hpp"
#include "hetmem/experiments.hpp"
#include "hetmem/platform.hpp"
#include "hetmem/runtime.hpp"

namespace py = pybind11;
using namespace hetmem;

namespace {

py::bytes read_host_bytes(const Platform& p, DataHandle h) {
  const auto v = p.read_host(h);
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

void write_host_bytes(Platform& p, DataHandle h, const py::bytes& data) {
  const std::string_view view = data;
  p.write_host(h, {reinterpret_cast<const std::byte*>(view.data()), view.size()});
}

py::dict report_to_dict(const RunReport& r) {
  py::dict d;
  d["copies_total"] = r.copies_total;
  d["bytes_moved"] = r.bytes_moved;
  py::dict edges;
  for (const auto& [edge, count] : r.copies_by_edge)
    edges[py::make_tuple(edge.first, edge.second)] = count;
  d["copies_by_edge"] = edges;
  d["hete_malloc_calls"] = r.hete_malloc_calls;
  d["hete_free_calls"] = r.hete_free_calls;
  d["fragment_calls"] = r.fragment_calls;
  d["flag_checks"] = r.flag_checks;
  d["simulated_time_ns"] = r.simulated_time_ns;
  d["wall_clock_alloc_ns"] = r.wall_clock_alloc_ns;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Location-tracked data handles, sub-allocators, and a simulated "
            "heterogeneous platform with reference and rimms data-flow protocols";

  py::register_exception<Error>(m, "Error");

  py::enum_<Mode>(m, "Mode")
      .value("REFERENCE", Mode::Reference)
      .value("RIMMS", Mode::Rimms);

  py::enum_<Kernel>(m, "Kernel")
      .value("FFT", Kernel::Fft)
      .value("IFFT", Kernel::Ifft)
      .value("ZIP", Kernel::Zip)
      .value("CPU_STAGE", Kernel::CpuStage);

  py::class_<DataHandle>(m, "DataHandle")
      .def_readonly("id", &DataHandle::id)
      .def("__eq__", [](DataHandle a, DataHandle b) { return a == b; })
      .def("__hash__", [](DataHandle h) { return h.id; })
      .def("__repr__",
           [](DataHandle h) { return "DataHandle(" + std::to_string(h.id) + ")"; });

  py::class_<BitsetHeap>(m, "BitsetHeap")
      .def(py::init<uint64_t, uint64_t>(), py::arg("capacity"), py::arg("block_size"))
      .def("alloc", &BitsetHeap::alloc)
      .def("free", &BitsetHeap::free)
      .def_property_readonly("capacity", &BitsetHeap::capacity)
      .def_property_readonly("free_bytes", &BitsetHeap::free_bytes)
      .def_property_readonly("metadata_footprint", &BitsetHeap::metadata_footprint)
      .def_property_readonly("block_count", &BitsetHeap::block_count)
      .def_property_readonly("used_blocks", &BitsetHeap::used_blocks);

  py::class_<NextFitHeap>(m, "NextFitHeap")
      .def(py::init<uint64_t>(), py::arg("capacity"))
      .def("alloc", &NextFitHeap::alloc)
      .def("free", py::overload_cast<uint64_t>(&NextFitHeap::free))
      .def_property_readonly("capacity", &NextFitHeap::capacity)
      .def_property_readonly("free_bytes", &NextFitHeap::free_bytes)
      .def_property_readonly("metadata_footprint", &NextFitHeap::metadata_footprint)
      .def_property_readonly("segment_count", &NextFitHeap::segment_count)
      .def_property_readonly("cursor_offset", &NextFitHeap::cursor_offset)
      .def("segments", [](const NextFitHeap& h) {
        py::list out;
        for (const auto& s : h.segments())
          out.append(py::make_tuple(s.offset, s.size, s.used));
        return out;
      });

  py::class_<Schedule>(m, "Schedule")
      .def_static("fixed", &Schedule::fixed, py::arg("task_to_resource"))
      .def_static("round_robin", &Schedule::round_robin, py::arg("resource_pool"));

  py::class_<Task>(m, "Task")
      .def_readonly("id", &Task::id)
      .def_readonly("label", &Task::label)
      .def_property_readonly("kernel", [](const Task& t) { return t.call.kernel; })
      .def_property_readonly("inputs", [](const Task& t) { return t.call.inputs; })
      .def_property_readonly("outputs", [](const Task& t) { return t.call.outputs; });

  py::class_<Dag>(m, "Dag").def_property_readonly(
      "tasks", [](const Dag& d) { return d.tasks; });

  py::class_<BuiltApp>(m, "BuiltApp")
      .def_readonly("name", &BuiltApp::name)
      .def_readonly("dag", &BuiltApp::dag)
      .def_readonly("inputs", &BuiltApp::inputs)
      .def_readonly("outputs", &BuiltApp::outputs)
      .def_readonly("roots", &BuiltApp::roots);

  py::class_<Platform>(m, "Platform")
      .def_static(
          "preset", [](const std::string& name) { return new Platform(Platform::from_preset(name)); },
          py::arg("name"))
      .def_static(
          "from_json",
          [](const std::string& text) { return new Platform(Platform::from_json(text)); },
          py::arg("json_text"))
      .def_property_readonly("name", &Platform::name)
      .def("hete_malloc", &Platform::hete_malloc, py::arg("size"))
      .def("hete_free", &Platform::hete_free)
      .def("hete_sync", &Platform::hete_sync)
      .def("fragment", &Platform::fragment, py::arg("handle"), py::arg("count"))
      .def("fragment_child", &Platform::fragment_child, py::arg("handle"), py::arg("index"))
      .def("fragment_count", &Platform::fragment_count)
      .def("mark_host_write", &Platform::mark_host_write)
      .def("write_host", &write_host_bytes)
      .def("read_host", &read_host_bytes)
      .def("data_size", &Platform::data_size)
      .def("last_domain", &Platform::last_domain)
      .def("is_fragment", &Platform::is_fragment)
      .def("transfer", &Platform::transfer, py::arg("handle"), py::arg("src"), py::arg("dst"),
           py::arg("task") = -1)
      .def("report", [](const Platform& p) { return report_to_dict(p.report()); })
      .def("report_json", [](const Platform& p) { return p.report().to_json(); })
      .def("reset_report", &Platform::reset_report)
      .def("simulated_time_ns", &Platform::simulated_time_ns)
      .def("domain_free_bytes", &Platform::domain_free_bytes)
      .def("domain_metadata_bytes", &Platform::domain_metadata_bytes)
      .def("domain_alloc_calls", &Platform::domain_alloc_calls)
      .def("domain_free_calls", &Platform::domain_free_calls)
      .def("live_handles", &Platform::live_handles)
      .def("enable_trace", &Platform::enable_trace)
      .def("take_trace",
           [](Platform& p) {
             py::list out;
             for (const auto& ev : p.take_trace()) out.append(format_trace_line(ev));
             return out;
           })
      .def("resource_names", [](const Platform& p) {
        py::list out;
        for (const auto& r : p.resources()) out.append(r.name);
        return out;
      });

  m.def("preset_json", [](const std::string& name) { return std::string(preset_json(name)); });
  m.def("preset_names", &preset_names);
  m.def("scenario_pool", &scenario_pool, py::arg("platform"), py::arg("scenario"));

  m.def("build_2fft", &build_2fft, py::arg("platform"), py::arg("n"), py::arg("seed") = 42,
        py::keep_alive<0, 1>());
  m.def("build_2fzf", &build_2fzf, py::arg("platform"), py::arg("n"), py::arg("seed") = 42,
        py::keep_alive<0, 1>());
  m.def("build_3zip", &build_3zip, py::arg("platform"), py::arg("n"), py::arg("seed") = 42,
        py::keep_alive<0, 1>());
  m.def("build_rc", &build_rc, py::arg("platform"), py::arg("seed") = 42, py::keep_alive<0, 1>());
  m.def("build_pd", &build_pd, py::arg("platform"), py::arg("scale") = 1,
        py::arg("use_fragment") = true, py::arg("seed") = 42, py::keep_alive<0, 1>());
  m.def("build_sar", &build_sar, py::arg("platform"), py::arg("scale") = 1,
        py::arg("use_fragment") = true, py::arg("seed") = 42, py::keep_alive<0, 1>());

  m.def("run_dag",
        [](Platform& p, const Dag& dag, const Schedule& s, Mode mode) {
          return report_to_dict(run_dag(p, dag, s, mode));
        },
        py::arg("platform"), py::arg("dag"), py::arg("schedule"), py::arg("mode"));
  m.def("run_app_pass",
        [](Platform& p, const BuiltApp& app, const Schedule& s, Mode mode) {
          return report_to_dict(run_app_pass(p, app, s, mode));
        },
        py::arg("platform"), py::arg("app"), py::arg("schedule"), py::arg("mode"));
  m.def("release_app", &release_app);
  m.def("output_checksum", &output_checksum);
  m.def("measure_flag_check_ns", &measure_flag_check_ns, py::arg("platform"), py::arg("handle"),
        py::arg("iterations") = 1000000);
}
