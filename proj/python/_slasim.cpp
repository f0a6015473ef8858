#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slasim/scenario.hpp"

namespace py = pybind11;
using namespace slasim;

namespace {

py::dict summary_dict(const RunSummary& s) {
    py::dict d;
    d["flows_total"] = s.flows_total;
    d["priority_flows"] = s.priority_flows;
    d["completed_flows"] = s.completed_flows;
    d["violations_priority"] = s.violations_priority;
    d["violations_normal"] = s.violations_normal;
    d["violation_rate"] = s.violation_rate;
    d["routing_ms_mean"] = s.routing_ms_mean;
    d["routing_ms_median"] = s.routing_ms_median;
    d["routing_ms_p99"] = s.routing_ms_p99;
    d["total_duplicate_fraction"] = s.total_duplicate_fraction;
    d["triggers"] = s.triggers;
    d["unactionable_triggers"] = s.unactionable_triggers;
    d["controller_events"] = s.controller_events;
    d["enhanced_flows"] = s.enhanced_flows;
    return d;
}

py::dict result_dict(const RunResult& r) {
    py::dict d;
    d["summary"] = summary_dict(r.summary);
    d["csv"] = records_to_csv(r.records);
    d["trace_digest"] = r.stats.trace_digest;
    d["packets_created"] = r.stats.packets_created;
    d["packets_dropped"] = r.stats.packets_dropped;
    return d;
}

}  // namespace

PYBIND11_MODULE(_slasim, m) {
    m.doc() = "Packet-level SLA routing simulator (native core)";

    static py::exception<ValidationError> invalid(m, "ValidationError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::list errors;
            for (const auto& s : e.errors()) errors.append(s);
            auto cls = py::reinterpret_borrow<py::object>(invalid.ptr());
            py::object exc = cls(e.what());
            exc.attr("errors") = errors;
            PyErr_SetObject(cls.ptr(), exc.ptr());
        }
    });

    m.def("recipe_names", &recipe_names);
    m.def("recipe", [](const std::string& name) { return serialize_scenario(recipe(name)); },
          "Scenario JSON for a built-in recipe.", py::arg("name"));
    m.def(
        "validate",
        [](const std::string& text) {
            try {
                parse_scenario(text);
            } catch (const ValidationError& e) {
                return e.errors();
            }
            return std::vector<std::string>{};
        },
        "Every problem in a scenario document; empty when valid.", py::arg("text"));
    m.def("normalize", [](const std::string& text) { return serialize_scenario(parse_scenario(text)); },
          "Scenario JSON with every default filled in.", py::arg("text"));
    m.def(
        "run",
        [](const std::string& text, std::uint64_t seed, std::optional<bool> enhance) {
            auto config = parse_scenario(text);
            if (enhance) config = with_enhancement(config, *enhance);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(config, seed);
            }
            return result_dict(r);
        },
        py::arg("text"), py::arg("seed"), py::arg("enhance") = py::none());
    m.def(
        "batch",
        [](const std::string& text, const std::vector<std::uint64_t>& seeds, unsigned parallel, bool compare) {
            const auto config = parse_scenario(text);
            BatchResult b;
            {
                py::gil_scoped_release release;
                b = run_batch(config, seeds, parallel, compare);
            }
            py::dict d;
            d["aggregate"] = summary_dict(b.aggregate);
            if (b.base_aggregate) d["base_aggregate"] = summary_dict(*b.base_aggregate);
            py::list runs;
            for (const auto& r : b.runs) {
                py::dict one = result_dict(r.result);
                one["seed"] = r.seed;
                if (r.base) one["base"] = result_dict(*r.base);
                runs.append(one);
            }
            d["runs"] = runs;
            py::dict counter;
            for (const auto& c : b.containment) {
                py::list ids;
                for (auto id : c.violated_only_enhanced) ids.append(id.value);
                counter[py::int_(c.seed)] = ids;
            }
            d["counterexamples"] = counter;
            return d;
        },
        py::arg("text"), py::arg("seeds"), py::arg("parallel") = 1, py::arg("compare") = false);
    m.def("parse_seed_list", &parse_seed_list, py::arg("text"));
}
