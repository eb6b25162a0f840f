#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "chainrisk/buffers.hpp"
#include "chainrisk/error.hpp"
#include "chainrisk/io.hpp"
#include "chainrisk/mitigation.hpp"
#include "chainrisk/risk.hpp"
#include "chainrisk/scheduler.hpp"
#include "chainrisk/simulation.hpp"

namespace py = pybind11;
using namespace chainrisk;

namespace {

py::dict schedule_dict(const Project& p, const std::vector<std::string>& methods,
                       const std::string& variance) {
  const auto base = build_baseline(p);
  const auto plan = identify_critical_chain(p, base);
  py::dict out;
  out["makespan"] = plan.makespan;
  out["start"] = base.start;
  out["finish"] = base.finish;
  out["resource_links"] = base.resource_links;
  out["critical_chain"] = plan.critical_chain;
  py::list chains;
  for (const auto& fc : plan.feeding_chains) {
    py::dict c;
    c["tasks"] = fc.tasks;
    c["merge_task"] = fc.merge_task;
    c["attach_task"] = fc.attach_task;
    chains.append(c);
  }
  out["feeding_chains"] = chains;
  py::dict buffers;
  for (const auto& name : methods) {
    const auto b = insert_buffers(plan, p, base, parse_buffer_method(name),
                                  parse_variance_model(variance));
    py::dict d;
    d["feeding_buffers"] = b.feeding_buffers;
    d["feeding_latest_start"] = b.feeding_latest_start;
    d["project_buffer"] = b.project_buffer;
    d["buffered_completion"] = b.buffered_completion;
    buffers[py::str(name)] = d;
  }
  out["buffers"] = buffers;
  return out;
}

py::dict simulate(const Project& p, const std::string& register_csv, std::size_t reps,
                  std::uint64_t seed, unsigned workers, std::optional<double> deadline) {
  RiskFactorMatrix matrix;
  if (!register_csv.empty()) {
    std::istringstream in(register_csv);
    matrix = parse_risk_register(in, &p).matrix;
  }
  SimConfig cfg;
  cfg.replications = reps;
  cfg.seed = seed;
  cfg.workers = workers;
  cfg.deadline = deadline;
  const auto r = run_simulation(p, matrix, build_baseline(p), cfg);
  py::dict out;
  out["mean"] = r.mean;
  out["std"] = r.std;
  out["min"] = r.min;
  out["max"] = r.max;
  out["percentiles"] = py::dict(py::arg("p10") = r.percentiles.p10,
                                py::arg("p50") = r.percentiles.p50,
                                py::arg("p80") = r.percentiles.p80,
                                py::arg("p90") = r.percentiles.p90,
                                py::arg("p95") = r.percentiles.p95);
  out["criticality_index"] = r.criticality_index;
  out["deadline_probability"] = r.deadline_probability;
  out["makespans"] = r.makespans;
  return out;
}

py::dict mitigation(const std::string& doc) {
  const auto [tree, events] = mitigation_from_json(nlohmann::json::parse(doc));
  const auto report = analyze_mitigation(tree, events);
  py::dict out;
  out["top_event_probability"] = report.top_event_probability;
  py::list causes;
  for (const auto& c : report.ranked_root_causes) causes.append(py::make_tuple(c.event, c.contribution));
  out["ranked_root_causes"] = causes;
  py::list paths;
  for (const auto& e : report.path_table) paths.append(py::make_tuple(e.signature, e.probability));
  out["path_table"] = paths;
  return out;
}

ChainEstimates chain_of(const std::vector<std::pair<double, double>>& safe_avg) {
  ChainEstimates c;
  for (const auto& [s, a] : safe_avg) c.tasks.push_back({s, a});
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Critical-chain scheduling and schedule risk analysis";

  static PyObject* error_type =
      py::exception<chainrisk::Error>(m, "ChainriskError", PyExc_ValueError).release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const chainrisk::Error& e) {
      py::object inst = py::handle(error_type)(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type, inst.ptr());
    }
  });

  py::class_<Project>(m, "Project")
      .def_property_readonly("task_ids",
                             [](const Project& p) {
                               std::vector<TaskId> ids;
                               for (const auto& t : p.tasks) ids.push_back(t.id);
                               return ids;
                             })
      .def_readonly("arcs", &Project::arcs)
      .def_readonly("deadline", &Project::deadline)
      .def("to_json", [](const Project& p) { return project_to_json(p).dump(); })
      .def("cpm_makespan",
           [](const Project& p) { return makespan(cpm_pass(p, durations_avg(p))); })
      .def("validate", [](const Project& p) {
        const auto r = validate_project(p);
        py::list errors, warnings;
        for (const auto& f : r.errors) errors.append(py::make_tuple(f.code, f.message, f.location));
        for (const auto& f : r.warnings) warnings.append(py::make_tuple(f.code, f.message, f.location));
        return py::dict(py::arg("errors") = errors, py::arg("warnings") = warnings);
      })
      .def("__len__", [](const Project& p) { return p.tasks.size(); });

  m.def("load_project", [](const std::string& path) { return load_project(path); },
        py::arg("path"));
  m.def("parse_patterson", &parse_patterson_string, py::arg("text"));
  m.def("project_from_json",
        [](const std::string& doc) { return project_from_json(nlohmann::ordered_json::parse(doc)); },
        py::arg("doc"));

  m.def("schedule", &schedule_dict, py::arg("project"),
        py::arg("methods") = std::vector<std::string>{"cpm", "rsem", "apd"},
        py::arg("variance") = "rsem_half_u");
  m.def("simulate", &simulate, py::arg("project"), py::arg("register_csv") = "",
        py::arg("replications") = 1000, py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("deadline") = std::nullopt);
  m.def("mitigation", &mitigation, py::arg("doc"));

  m.def("cut_paste_buffer", [](const std::vector<std::pair<double, double>>& c) {
    return cut_paste_buffer(chain_of(c));
  }, py::arg("safe_avg"));
  m.def("rsem_buffer", [](const std::vector<std::pair<double, double>>& c) {
    return rsem_buffer(chain_of(c));
  }, py::arg("safe_avg"));
  m.def("apd_buffer",
        [](std::size_t tasks, std::size_t arcs, const std::vector<double>& path_variances) {
          FeedingSubnetwork s;
          for (std::size_t i = 1; i <= std::max(tasks, path_variances.size()); ++i) {
            s.tasks.push_back(static_cast<TaskId>(i));
            s.variances[static_cast<TaskId>(i)] = 0.0;
          }
          for (std::size_t i = 0; i < path_variances.size(); ++i) {
            s.longest_path.push_back(static_cast<TaskId>(i + 1));
            s.variances[static_cast<TaskId>(i + 1)] = path_variances[i];
          }
          s.arc_count = arcs;
          return apd_buffer(s);
        },
        py::arg("tasks"), py::arg("arcs"), py::arg("path_variances"));

  m.def("risk_criticality",
        [](double p, double ai, double d) { return risk_criticality(p, ai, d, default_rule_base()); },
        py::arg("p"), py::arg("ai"), py::arg("d"));
  m.def("ahp_weights",
        [](const std::string& doc) {
          const auto w = ahp_weights(ahp_from_json(nlohmann::json::parse(doc)));
          return py::make_tuple(w.tpc, w.tpt, w.tpq);
        },
        py::arg("doc"));
}
