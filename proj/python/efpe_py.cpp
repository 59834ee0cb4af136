#include "efpe/cli_io.hpp"
#include "efpe/rational_lp.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace efpe;
using efpe::io::json;

namespace {

Instance parse_instance(const std::string& text, bool strict) {
    return io::instance_from_json(json::parse(text), strict).instance;
}

RationalVector parse_vector(const std::vector<std::string>& v) {
    RationalVector out;
    for (const auto& s : v) out.push_back(parse_rational(s));
    return out;
}

std::string solve(const std::string& instance, const std::string& epsilon, std::size_t max_iters, std::size_t grid,
                  std::size_t jobs, bool strict) {
    const Instance inst = parse_instance(instance, strict);
    EngineConfig cfg;
    cfg.max_iterations = max_iters;
    cfg.grid_search = grid > 0;
    cfg.grid_resolution = grid;
    cfg.jobs = jobs;
    if (epsilon != "auto") cfg.epsilon = parse_rational(epsilon);
    std::optional<SolveResult> r;
    {
        py::gil_scoped_release release;
        r.emplace(find_fixed_point(inst, cfg));
    }
    return io::solve_result_to_json(*r, inst, 0.0).dump();
}

std::string verify(const std::string& instance, const std::string& allocation) {
    const Instance inst = parse_instance(instance, false);
    const MixedAllocation p = io::mixed_allocation_from_json(json::parse(allocation), inst);
    return io::certificate_to_json(certify(p, inst), inst).dump();
}

std::string envy_graph(const std::string& instance, const std::string& allocation) {
    const Instance inst = parse_instance(instance, false);
    const MixedAllocation p = io::mixed_allocation_from_json(json::parse(allocation), inst);
    return io::envy_graph_to_dot(build_envy_graph(p, inst));
}

DisjointnessInput hard_input(std::size_t p, const std::string& x1, const std::string& x2) {
    return io::disjointness_input(io::HardOptions{p, x1, x2, std::nullopt});
}

}  // namespace

PYBIND11_MODULE(_efpe, m) {
    m.doc() = "Exact solver and certifier for envy-free, Pareto-efficient mixed allocations";

    py::register_exception<io::InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<SearchFailure>(m, "SearchFailure", PyExc_RuntimeError);

    m.def("solve", &solve, py::arg("instance"), py::arg("epsilon") = "auto",
          py::arg("max_iters") = EngineConfig{}.max_iterations, py::arg("grid") = EngineConfig{}.grid_resolution,
          py::arg("jobs") = 1, py::arg("strict") = false);
    m.def("verify", &verify, py::arg("instance"), py::arg("allocation"));
    m.def("envy_graph", &envy_graph, py::arg("instance"), py::arg("allocation"));
    m.def("closure", [](const std::string& instance) {
        const Instance inst = parse_instance(instance, false);
        json doc = io::instance_to_json(inst);
        json list = json::array();
        for (const auto& a : inst.allocations().allocations()) list.push_back(io::allocation_to_json(a));
        doc["allocations"] = std::move(list);
        return doc.dump();
    });
    m.def("gen_hard", [](std::size_t p, const std::string& x1, const std::string& x2) {
        return io::instance_to_json(build_hard_instance(hard_input(p, x1, x2))).dump();
    });
    m.def("verify_dichotomy", [](std::size_t p, const std::string& x1, const std::string& x2) {
        return io::dichotomy_report_to_json(verify_welfare_dichotomy(hard_input(p, x1, x2))).dump();
    });
    m.def("project", [](const std::vector<std::string>& y, const std::string& eps) {
        return to_strings(project_onto_truncated_simplex(parse_vector(y), parse_rational(eps)));
    }, py::arg("y"), py::arg("epsilon"));
}
