#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/stl.h>

#include "cansys/asymptotics.hpp"
#include "cansys/snode.hpp"
#include "cansys/structured.hpp"
#include "cansys/transform.hpp"
#include "cansys/weyl.hpp"

namespace py = pybind11;
using namespace cansys;

namespace {

using Params = std::map<std::string, double>;

py::dict validate(const std::string& name, double r, int n, const Params& par) {
    auto v = validate_beta(builtin_system(name, r, par), Grid(r, n));
    py::dict d;
    d["pass"] = v.pass;
    d["flat_residual"] = v.flat_residual;
    d["deriv_residual"] = v.deriv_residual;
    d["min_eig_H"] = v.min_eig_H;
    d["value_defect"] = v.consistency.value_defect;
    return d;
}

py::dict fundamental(const std::string& name, cplx lam, double r, int n, const Params& par) {
    auto fs = integrate_fundamental(builtin_system(name, r, par), lam, Grid(r, n));
    py::dict d;
    d["x"] = fs.x;
    d["W"] = fs.W;
    d["j_residual"] = fs.j_residual;
    d["inverse_residual"] = fs.inverse_residual;
    return d;
}

py::dict normalized_E(const std::string& name, double r, int n, const Params& par) {
    Grid g(r, n);
    auto e = discrete_normalized_E(builtin_system(name, r, par), g, 0);
    py::dict d;
    d["x"] = g.nodes();
    d["phi1"] = e.Phi1_nodes;
    d["E"] = e.E.M;
    d["similarity_residual"] = e.similarity_residual;
    d["normalization_residual"] = e.normalization_residual;
    return d;
}

py::dict extract(const std::string& builtin, int n, double r, double zmin, double zmax, int count) {
    bool hat = builtin.rfind("example64", 0) == 0;
    if (count <= 0) count = extraction_sample_count(n);
    auto s = sample_ray(builtin_weyl(builtin), r, hat, ray_points(M_PI / 4, zmin, zmax, count));
    auto est = extract_phi1(s, n);
    py::dict d;
    d["x"] = est.grid.nodes();
    d["phi1"] = est.values;
    d["misfit"] = est.misfit;
    d["condition"] = est.condition;
    d["samples"] = est.samples;
    return d;
}

py::dict factorize(const std::string& name, int n, const std::vector<double>& ells, const std::vector<cplx>& lams) {
    auto sys = builtin_system(name, 1.0);
    Grid g(1.0, n);
    SNode node = name == "example64" ? snode_identity(sys, g) : snode_from_E(discrete_normalized_E(sys, g, 0).E.M, sys, g);
    auto fr = factorization_residual(sys, node, ells, lams);
    py::dict d;
    d["residual"] = fr.residual;
    d["worst"] = fr.worst;
    d["identity_residual"] = node.identity_residual;
    return d;
}

py::dict series(const std::string& name, int kmax, int table_n) {
    auto s = series_sum(builtin_series(name), kmax, table_n);
    py::dict d;
    d["bound_holds"] = s.bound_holds;
    d["max_norm"] = s.max_norm;
    d["bound_ratio"] = s.bound_ratio;
    d["C"] = s.C;
    return d;
}

} // namespace

PYBIND11_MODULE(_cansys, m) {
    m.doc() = "Canonical systems: fundamental solutions, Weyl functions, S-nodes and amplitudes";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<SingularError>(m, "SingularError", PyExc_ArithmeticError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("builtin_names", &builtin_names);
    m.def("validate_beta", &validate, py::arg("name"), py::arg("r") = 1.0, py::arg("n") = 256,
          py::arg("params") = Params{});
    m.def("fundamental", &fundamental, py::arg("name"), py::arg("lam"), py::arg("r") = 1.0, py::arg("n") = 256,
          py::arg("params") = Params{});
    m.def(
        "closed_form_example64",
        [](const std::vector<double>& xs, cplx lam, int p) { return closed_form_example64(xs, lam, p).W; },
        py::arg("x"), py::arg("lam"), py::arg("p") = 1);
    m.def(
        "closed_form_example23",
        [](const std::vector<double>& xs, cplx lam, double c) {
            return closed_form_example23(xs, lam, Mat::Identity(1, 1), c).W;
        },
        py::arg("x"), py::arg("lam"), py::arg("c") = 0.5);
    m.def(
        "quadratic_roots",
        [](cplx lam) {
            auto q = quadratic_roots(lam);
            return py::make_tuple(q.zeta1, q.zeta2, q.real_axis_branch);
        },
        py::arg("lam"));
    m.def(
        "weyl_function", [](const std::string& name, cplx lam) { return builtin_weyl(name)(lam); }, py::arg("name"),
        py::arg("lam"));
    m.def("normalized_E", &normalized_E, py::arg("name"), py::arg("r") = 1.0, py::arg("n") = 256,
          py::arg("params") = Params{});
    m.def("extract_phi1", &extract, py::arg("builtin") = "example65", py::arg("n") = 64, py::arg("r") = 1.0,
          py::arg("zmin") = 2.0, py::arg("zmax") = 200.0, py::arg("count") = 0);
    m.def(
        "convolution_residual",
        [](const std::string& amplitude, double r, int n) {
            return convolution_identity_residual(amplitude_profile(amplitude), Grid(r, n));
        },
        py::arg("amplitude"), py::arg("r") = 1.0, py::arg("n") = 256);
    m.def("factorization", &factorize, py::arg("name") = "example64", py::arg("n") = 256,
          py::arg("ells") = std::vector<double>{0.25, 0.5, 1.0},
          py::arg("lams") = std::vector<cplx>{cplx(0, 1), cplx(1, 1), cplx(0, 4)});
    m.def("series", &series, py::arg("name"), py::arg("kmax") = 4, py::arg("table_n") = 12);
}
