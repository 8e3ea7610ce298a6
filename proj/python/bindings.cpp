#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "flatstruct/catalog.hpp"
#include "flatstruct/isomono.hpp"
#include "flatstruct/midconv.hpp"

namespace py = pybind11;
using namespace flatstruct;

namespace {

std::vector<cd> lambda_of(const SaitoMatrices& m) {
    std::vector<cd> out;
    for (const auto& w : m.Binf) out.emplace_back(w.get_d());
    return out;
}

std::vector<std::pair<int, int>> failing_commutators(const WdvvReport& r) {
    std::vector<std::pair<int, int>> out;
    for (const auto& [pq, M] : r.commutators) {
        bool zero = true;
        for (const auto& row : M)
            for (const auto& e : row) zero = zero && e.is_zero();
        if (!zero) out.emplace_back(pq.first + 1, pq.second + 1);
    }
    return out;
}

py::dict p6_run(const std::string& id, std::pair<int, int> entry) {
    auto e = catalog_get(id);
    auto m = build_saito_matrices(e.build());
    auto path = e.default_path;
    path.entry = {entry.first - 1, entry.second - 1};
    P6Run run;
    {
        py::gil_scoped_release nogil;
        run = extract_p6_solution(m, lambda_of(m), path.entry, path.p6_path());
    }
    std::vector<cd> t, y;
    double worst = 0;
    for (const auto& s : run.samples) {
        t.push_back(s.t);
        y.push_back(s.y);
        worst = std::max(worst, s.residual);
    }
    py::dict d;
    d["t"] = t;
    d["y"] = y;
    d["theta"] = std::vector<cd>{run.params.theta0, run.params.theta1, run.params.thetat, run.params.thetainf};
    d["max_residual"] = worst;
    return d;
}

py::dict jm(std::uint64_t seed) {
    JMRoundTrip r;
    {
        py::gil_scoped_release nogil;
        r = jm_round_trip(random_jm_case(seed));
    }
    py::dict d;
    d["theta"] = std::vector<cd>(r.input.thetas.begin(), r.input.thetas.end());
    d["kappa"] = std::vector<cd>(r.input.kappas.begin(), r.input.kappas.end());
    d["pvi_residual"] = r.pvi_residual;
    d["schlesinger_residual"] = r.schlesinger_residual;
    d["trace_error"] = r.trace_error;
    d["ainf_error"] = r.ainf_error;
    d["passed"] = r.passed();
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "flat structures on spaces of isomonodromic deformations";
    auto err = py::register_exception<Error>(m, "FlatstructError", PyExc_ValueError);
    (void)err;

    py::class_<WdvvReport>(m, "WdvvReport")
        .def_readonly("unit_ok", &WdvvReport::unit_ok)
        .def_readonly("homogeneity_ok", &WdvvReport::homogeneity_ok)
        .def_readonly("saito_relations_ok", &WdvvReport::saito_relations_ok)
        .def_readonly("flat_normalization_ok", &WdvvReport::flat_normalization_ok)
        .def_property_readonly("failing_commutators", &failing_commutators)
        .def("passed", &WdvvReport::passed);

    m.def("catalog_ids", &catalog_ids);
    m.def("catalog_entry_json", [](const std::string& id) { return catalog_entry_to_json(catalog_get(id)); });
    m.def(
        "verify_json",
        [](const std::string& id, const std::string& depth, double residual, double identity, double trace) {
            return catalog_verify(id, parse_depth(depth), Tolerances{residual, identity, trace}).to_json();
        },
        py::arg("id"), py::arg("depth") = "symbolic", py::arg("residual") = 1e-6, py::arg("identity") = 1e-10,
        py::arg("trace") = 1e-8, py::call_guard<py::gil_scoped_release>());
    m.def(
        "check_wdvv", [](const std::string& doc) { return check_extended_wdvv(parse_pvf(doc)); }, py::arg("document"),
        py::call_guard<py::gil_scoped_release>());
    m.def(
        "normalize_expr",
        [](const std::string& text, const std::vector<std::string>& weights) {
            return serialize_expr(parse_expr(text, build_ring(weights, std::nullopt)));
        },
        py::arg("text"), py::arg("weights"));
    m.def("extract_p6", &p6_run, py::arg("id"), py::arg("entry") = std::pair<int, int>{1, 2});
    m.def("jm_round_trip", &jm, py::arg("seed") = 1);
}
