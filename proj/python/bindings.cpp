#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pgl/asymptotics.hpp"
#include "pgl/energy.hpp"
#include "pgl/error.hpp"
#include "pgl/profile.hpp"
#include "pgl/stability.hpp"

namespace py = pybind11;
using namespace pgl;

namespace {

py::array_t<double> to_array(std::span<const double> v) { return py::array_t<double>(v.size(), v.data()); }

Profile solve_py(double p, std::size_t nodes, const std::string& solver, double tol) {
    const Params params(p);
    SolverKind kind = default_solver(params);
    if (solver == "shooting") kind = SolverKind::shooting;
    else if (solver == "variational") kind = SolverKind::variational;
    else if (solver != "default") throw InvalidArgument("solver must be default, shooting or variational");
    return solve(params, default_grid(params, nodes), kind, tol);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Radial degree-one minimizers of the p-Ginzburg-Landau energy";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    py::class_<Profile>(m, "Profile")
        .def_property_readonly("p", [](const Profile& s) { return s.params.p(); })
        .def_property_readonly("r", [](const Profile& s) { return to_array(s.grid.nodes()); })
        .def_property_readonly("f", [](const Profile& s) { return to_array(s.f); })
        .def_property_readonly("df", [](const Profile& s) { return to_array(s.df); })
        .def_property_readonly("h", [](const Profile& s) { return to_array(s.h); })
        .def_property_readonly("tail", [](const Profile& s) { return to_array(s.tail); })
        .def_property_readonly("gradient_norm", [](const Profile& s) { return to_array(s.gradient_norm); })
        .def_readonly("f_prime_at_zero", &Profile::f_prime_at_zero)
        .def_property_readonly("solver", [](const Profile& s) { return to_string(s.info.kind); })
        .def("__repr__", [](const Profile& s) {
            return "<Profile p=" + std::to_string(s.params.p()) + " nodes=" + std::to_string(s.grid.size()) + ">";
        });

    m.def("solve", &solve_py, py::arg("p"), py::arg("nodes") = 2001, py::arg("solver") = "default",
          py::arg("tol") = 0.0);
    m.def("sup_distance", &sup_distance);
    m.def("f_infinity", &f_infinity);

    m.def("audit", [](const Profile& s, double tol) {
        py::dict out;
        for (const auto& c : audit(s, tol).checks)
            out[py::str(c.name)] = py::dict(py::arg("pass") = c.pass, py::arg("worst") = c.worst,
                                            py::arg("radius") = c.radius);
        return out;
    }, py::arg("profile"), py::arg("tol") = 1e-8);

    m.def("energy", [](const Profile& s) {
        const auto e = energy(s);
        return py::dict(py::arg("kinetic") = e.kinetic, py::arg("potential") = e.potential,
                        py::arg("total") = e.total, py::arg("pohozaev_residual") = e.pohozaev_residual,
                        py::arg("tail_correction") = e.tail_correction);
    });
    m.def("pohozaev_check", &pohozaev_check);
    m.def("distance_to_limit", &distance_to_limit);
    m.def("test_function_energy", &test_function_energy);

    m.def("tail_constants", [](const Profile& s) {
        const auto a = tail_constants(s);
        return py::dict(py::arg("potential") = a.tail_const_potential,
                        py::arg("derivative") = a.tail_const_derivative,
                        py::arg("target_potential") = a.target_potential,
                        py::arg("target_derivative") = a.target_derivative);
    });
    m.def("g_vs_g0", &g_vs_g0, py::arg("profile"), py::arg("a") = 1.2);

    m.def("stability_survey", [](const Profile& s, int max_mode, std::size_t k) {
        const auto sv = stability_survey(s, max_mode, k);
        py::list modes;
        for (const auto& ms : sv.modes)
            modes.append(py::dict(py::arg("n") = ms.n, py::arg("kind") = to_string(ms.kind),
                                  py::arg("copies") = ms.copies, py::arg("eigenvalues") = ms.report.eigenvalues,
                                  py::arg("near_zero") = ms.near_zero));
        return py::dict(py::arg("p") = sv.p, py::arg("stable") = sv.stable(),
                        py::arg("negative_count") = sv.negative_count,
                        py::arg("kernel_dimension") = sv.kernel_dimension,
                        py::arg("min_kernel_overlap") = sv.min_kernel_overlap, py::arg("modes") = modes);
    }, py::arg("profile"), py::arg("max_mode") = 8, py::arg("k") = 6);

    m.def("coefficient_signs", [](const Profile& s) {
        const auto c = coefficient_signs(assemble_G2(s).tables, s.params.p());
        return py::dict(py::arg("alpha_positive") = c.alpha_positive, py::arg("beta_positive") = c.beta_positive,
                        py::arg("b_negative") = c.b_negative, py::arg("certified_range") = c.certified_range,
                        py::arg("first_alpha_violation") = c.first_alpha_violation,
                        py::arg("first_b_violation") = c.first_b_violation);
    });
}
